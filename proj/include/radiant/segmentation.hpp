#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "radiant/camera.hpp"
#include "radiant/errors.hpp"
#include "radiant/geometry.hpp"
#include "radiant/parallel.hpp"
#include "radiant/plane_extraction.hpp"
#include "radiant/scene.hpp"
#include "radiant/scene_io.hpp"

namespace radiant {

/// One externally produced detection. `frame` is the zero-based position in the
/// sorted frame sequence; `polygon` is in depth-image pixel coordinates.
struct Detection {
  std::size_t frame = 0;
  std::string label;
  double confidence = 0.0;
  Polygon2 polygon;
};

inline void validate_detection(const Detection& d, const PinholeIntrinsics& depth, std::size_t frame_count) {
  if (d.frame >= frame_count) {
    throw Error(ErrorKind::InvalidArgument, "detection refers to frame " + std::to_string(d.frame) + " of " +
                                                std::to_string(frame_count));
  }
  if (d.label.empty()) throw Error(ErrorKind::InvalidArgument, "detection label must not be empty");
  if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "detection confidence must lie in [0, 1]");
  }
  if (d.polygon.size() < 3) throw Error(ErrorKind::InvalidArgument, "detection polygon needs at least 3 vertices");
  for (const auto& p : d.polygon) {
    if (!p.allFinite() || p.x() < 0.0 || p.y() < 0.0 || p.x() > depth.width || p.y() > depth.height) {
      throw Error(ErrorKind::InvalidArgument, "detection polygon leaves the image bounds");
    }
  }
}

/// World-space evidence from one detection.
struct Observation {
  std::size_t detection = 0;
  std::size_t frame = 0;
  std::string label;
  double confidence = 0.0;
  std::vector<Vec3> points;
  Vec3 centroid = Vec3::Zero();
  Aabb3 bounds;
};

struct LiftResult {
  std::optional<Observation> observation;
  std::string notice;  // set when skipped
};

inline constexpr std::size_t kMinLiftPixels = 10;

/// Rasterizes the mask (pixel centers inside the polygon, boundary included)
/// and back-projects every valid depth pixel into the world with `pose`.
inline LiftResult lift_detection(const Detection& det, const FrameBundle& frame, const CameraModel& cams,
                                 const RigidTransform& pose, std::size_t detection_index = 0) {
  const auto& k = cams.depth;
  double umin = k.width, umax = 0, vmin = k.height, vmax = 0;
  for (const auto& p : det.polygon) {
    umin = std::min(umin, p.x());
    umax = std::max(umax, p.x());
    vmin = std::min(vmin, p.y());
    vmax = std::max(vmax, p.y());
  }
  const int u0 = std::max(0, static_cast<int>(std::floor(umin)));
  const int u1 = std::min(k.width - 1, static_cast<int>(std::ceil(umax)));
  const int v0 = std::max(0, static_cast<int>(std::floor(vmin)));
  const int v1 = std::min(k.height - 1, static_cast<int>(std::ceil(vmax)));

  Observation obs;
  obs.detection = detection_index;
  obs.frame = det.frame;
  obs.label = det.label;
  obs.confidence = det.confidence;
  for (int v = v0; v <= v1; ++v) {
    for (int u = u0; u <= u1; ++u) {
      if (!point_in_polygon(Vec2(u, v), det.polygon, 1e-9)) continue;
      const std::uint16_t d = frame.depth.at(u, v);
      if (d == 0) continue;
      obs.points.push_back(pose * k.back_project(u, v, d * kMillimeter));
    }
  }
  LiftResult out;
  if (obs.points.size() < kMinLiftPixels) {
    out.notice = "detection " + std::to_string(detection_index) + " (frame " + std::to_string(det.frame) + ", '" +
                 det.label + "') skipped: " + std::to_string(obs.points.size()) + " valid depth pixels";
    return out;
  }
  for (const auto& p : obs.points) {
    obs.centroid += p;
    obs.bounds.expand(p);
  }
  obs.centroid /= static_cast<double>(obs.points.size());
  out.observation = std::move(obs);
  return out;
}

struct InstanceTrack {
  std::size_t id = 0;
  std::map<std::string, int> votes;
  std::map<std::string, double> confidence;  // cumulative per label
  std::vector<std::size_t> detections;
  std::vector<Vec3> points;
  Aabb3 bounds;

  int total_votes() const {
    int n = 0;
    for (const auto& [label, count] : votes) n += count;
    return n;
  }

  void add(const Observation& obs) {
    ++votes[obs.label];
    confidence[obs.label] += obs.confidence;
    detections.push_back(obs.detection);
    points.insert(points.end(), obs.points.begin(), obs.points.end());
    bounds.expand(obs.bounds);
  }

  /// Least-squares plane through the member points.
  Plane fitted_plane() const {
    std::vector<std::size_t> idx(points.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return detail::fit_plane_pca(points, idx).plane;
  }
};

struct AssociationParams {
  double iou_threshold = 0.3;
  double bounds_padding = 0.05;  // m, gives wall-flat boxes a volume
};

/// Greedy association in (frame, detection) order.
inline std::vector<InstanceTrack> associate(std::vector<Observation> observations, const AssociationParams& params = {}) {
  std::stable_sort(observations.begin(), observations.end(), [](const Observation& a, const Observation& b) {
    return a.frame != b.frame ? a.frame < b.frame : a.detection < b.detection;
  });
  std::vector<InstanceTrack> tracks;
  for (const auto& obs : observations) {
    const Aabb3 box = obs.bounds.padded(params.bounds_padding);
    double best = -1.0;
    std::size_t best_track = 0;
    for (std::size_t t = 0; t < tracks.size(); ++t) {
      const double score = iou(box, tracks[t].bounds.padded(params.bounds_padding));
      if (score > best) {
        best = score;
        best_track = t;
      }
    }
    if (best >= params.iou_threshold) {
      tracks[best_track].add(obs);
    } else {
      InstanceTrack track;
      track.id = tracks.size();
      track.add(obs);
      tracks.push_back(std::move(track));
    }
  }
  return tracks;
}

/// Most votes; ties go to higher cumulative confidence, then the smaller label.
inline std::string vote_label(const InstanceTrack& track) {
  if (track.votes.empty()) throw Error(ErrorKind::InvalidArgument, "track " + std::to_string(track.id) + " has no votes");
  const std::string* best = nullptr;
  int best_count = -1;
  double best_conf = 0.0;
  for (const auto& [label, count] : track.votes) {  // ascending label order
    const auto it = track.confidence.find(label);
    const double conf = it == track.confidence.end() ? 0.0 : it->second;
    if (count > best_count || (count == best_count && conf > best_conf)) {
      best = &label;
      best_count = count;
      best_conf = conf;
    }
  }
  return *best;
}

struct RegistrationParams {
  double max_plane_distance = 0.05;  // m
  double max_plane_angle_deg = 10.0;
  double min_feature_area = 1e-4;    // m^2
  double distance_threshold = kDefaultDistanceThreshold;
};

struct RegisteredFeature {
  std::optional<std::size_t> surface;  // index into the scene; empty for orphans
  ThermalFeature feature;
  std::string notice;
};

/// Attaches a track to the best matching surface and returns the clipped
/// minimum-area rectangle of its projected points (temperature left at 0).
inline RegisteredFeature register_feature(const InstanceTrack& track, const Scene& scene,
                                          const RegistrationParams& params = {}) {
  RegisteredFeature out;
  out.feature.id = "feature-" + std::to_string(track.id);
  out.feature.label = vote_label(track);
  const std::string name = "track " + std::to_string(track.id) + " ('" + out.feature.label + "')";
  if (track.points.size() < 3) {
    out.notice = name + " orphaned: fewer than 3 points";
    return out;
  }
  const Plane plane = track.fitted_plane();
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : track.points) centroid += p;
  centroid /= static_cast<double>(track.points.size());

  const double cos_limit = std::cos(deg_to_rad(params.max_plane_angle_deg));
  double best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const SurfaceGeometry& g = scene.geometry(i);
    if (std::abs(g.frame.normal.dot(plane.normal)) < cos_limit) continue;
    const double dist = std::abs(g.frame.normal.dot(centroid - g.frame.origin));
    if (dist > params.max_plane_distance) continue;
    if (!point_in_polygon(g.frame.to_2d(centroid), g.outline, params.max_plane_distance)) continue;
    if (dist < best_distance) {
      best_distance = dist;
      out.surface = i;
    }
  }
  if (!out.surface) {
    out.notice = name + " orphaned: no surface within " + std::to_string(params.max_plane_distance) + " m and " +
                 std::to_string(params.max_plane_angle_deg) + " deg";
    return out;
  }
  const SurfaceGeometry& g = scene.geometry(*out.surface);
  std::vector<Vec2> projected;
  projected.reserve(track.points.size());
  for (const auto& p : track.points) projected.push_back(g.frame.to_2d(p));
  Polygon2 rect;
  try {
    rect = ensure_ccw(min_area_rectangle(projected));
  } catch (const Error& e) {
    out.surface.reset();
    out.notice = name + " orphaned: " + e.what();
    return out;
  }
  Polygon2 clipped = ensure_ccw(clip_polygon(ensure_ccw(g.outline), rect));
  if (clipped.size() < 3 || area(clipped) < params.min_feature_area) {
    out.notice = name + " orphaned: nothing left after clipping to '" + scene.surface(*out.surface).id + "'";
    out.surface.reset();
    return out;
  }
  out.feature.corners = lift_polygon(g.frame, clipped);
  return out;
}

namespace detail {

/// Part of `loser` outside the convex hull of `winner`, taken as the single
/// half-plane cut along a hull edge that keeps the most area.
inline Polygon2 shrink_away(const Polygon2& loser, const Polygon2& winner) {
  const Polygon2 hull = convex_hull(std::vector<Vec2>(winner.begin(), winner.end()));
  Polygon2 best;
  double best_area = -1.0;
  for (std::size_t e = 0; e < hull.size(); ++e) {
    const Vec2& a = hull[e];
    const Vec2& b = hull[(e + 1) % hull.size()];
    Polygon2 part = clip_half_plane(loser, b, a);  // right of a->b, outside the hull
    const double a_part = part.size() >= 3 ? area(part) : 0.0;
    if (a_part > best_area) {
      best_area = a_part;
      best = std::move(part);
    }
  }
  return best;
}

}  // namespace detail

struct SegmentationParams {
  AssociationParams association;
  RegistrationParams registration;
  unsigned threads = 1;
};

struct SegmentationResult {
  std::vector<InstanceTrack> tracks;
  std::vector<long> detection_track;  // per detection, -1 when skipped
  std::vector<std::string> notices;
  std::size_t registered = 0;
};

/// Registers every track onto `scene` and recomputes feature and envelope
/// temperatures from `cloud`. Overlaps between features on one surface are
/// resolved by shrinking the larger one.
inline Scene attach_features(const Scene& scene, const std::vector<InstanceTrack>& tracks, const ThermalPointCloud& cloud,
                             const RegistrationParams& params, std::vector<std::string>& notices,
                             std::size_t* registered = nullptr) {
  std::vector<Surface> surfaces = scene.surfaces();
  std::vector<std::vector<Polygon2>> added(surfaces.size());
  std::vector<std::size_t> base_count(surfaces.size());
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    base_count[i] = surfaces[i].features.size();
    for (const auto& f : scene.geometry(i).features) added[i].push_back(f);
  }

  for (const auto& track : tracks) {
    RegisteredFeature reg = register_feature(track, scene, params);
    if (!reg.surface) {
      notices.push_back(reg.notice + "; excluded from MRT");
      continue;
    }
    const std::size_t s = *reg.surface;
    const SurfaceGeometry& g = scene.geometry(s);
    Polygon2 poly = project_polygon(g.frame, reg.feature.corners);
    bool rejected = false;
    for (std::size_t k = 0; k < added[s].size() && !rejected; ++k) {
      if (intersection_area(poly, added[s][k]) <= kOverlapAreaTolerance) continue;
      if (area(poly) >= area(added[s][k])) {
        poly = detail::shrink_away(poly, added[s][k]);
        if (poly.size() < 3 || area(poly) < params.min_feature_area) rejected = true;
      } else {
        Polygon2 other = detail::shrink_away(added[s][k], poly);
        if (other.size() < 3 || area(other) < params.min_feature_area) {
          rejected = true;  // would erase an existing feature; the newcomer yields instead
        } else {
          added[s][k] = std::move(other);
          notices.push_back("feature on '" + surfaces[s].id + "' shrunk to avoid overlap with '" + reg.feature.id + "'");
        }
      }
    }
    if (rejected) {
      notices.push_back("track " + std::to_string(track.id) + " rejected: overlaps an existing feature on '" +
                        surfaces[s].id + "'");
      continue;
    }
    reg.feature.corners = lift_polygon(g.frame, poly);
    surfaces[s].features.push_back(reg.feature);
    added[s].push_back(poly);
  }

  // write back shrunk polygons, then temperatures from the cloud
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    const SurfaceGeometry& g = scene.geometry(i);
    for (std::size_t k = 0; k < surfaces[i].features.size(); ++k) {
      if (k < base_count[i] && added[i][k] == g.features[k]) continue;
      surfaces[i].features[k].corners = lift_polygon(g.frame, added[i][k]);
    }
  }
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    auto& feats = surfaces[i].features;
    std::vector<ThermalFeature> kept;
    for (std::size_t k = 0; k < feats.size(); ++k) {
      const bool fresh = k >= base_count[i];
      try {
        feats[k].temperature_k = feature_temperature(cloud, surfaces[i], feats[k], params.distance_threshold);
      } catch (const Error& e) {
        if (!fresh) {
          notices.push_back(std::string(e.what()) + "; feature keeps its previous temperature");
        } else {
          notices.push_back(std::string(e.what()) + "; feature excluded from MRT");
          continue;
        }
      }
      kept.push_back(feats[k]);
      if (fresh && registered) ++*registered;
    }
    feats = std::move(kept);
    try {
      surfaces[i].temperature_k = surface_temperature(cloud, surfaces[i], params.distance_threshold);
    } catch (const Error& e) {
      notices.push_back(std::string(e.what()) + "; envelope keeps its previous temperature");
    }
  }
  return Scene(std::move(surfaces), scene.closed_enclosure());
}

/// Full segmentation pass: lift (parallel), associate, vote, register.
/// `poses` are the world <- depth-camera poses to lift with, one per frame.
inline std::pair<Scene, SegmentationResult> segment(const Scene& scene, const ThermalPointCloud& cloud,
                                                    const std::vector<Detection>& detections,
                                                    const std::vector<FrameBundle>& frames,
                                                    const std::vector<RigidTransform>& poses, const CameraModel& cams,
                                                    const SegmentationParams& params = {}) {
  if (poses.size() != frames.size()) throw Error(ErrorKind::InvalidArgument, "need one pose per frame");
  for (const auto& d : detections) validate_detection(d, cams.depth, frames.size());

  std::vector<LiftResult> lifted(detections.size());
  parallel_for(detections.size(), params.threads, [&](std::size_t i) {
    const Detection& d = detections[i];
    lifted[i] = lift_detection(d, frames[d.frame], cams, poses[d.frame], i);
  });

  SegmentationResult result;
  result.detection_track.assign(detections.size(), -1);
  std::vector<Observation> observations;
  for (auto& l : lifted) {
    if (l.observation) {
      observations.push_back(std::move(*l.observation));
    } else {
      result.notices.push_back(l.notice);
    }
  }
  result.tracks = associate(std::move(observations), params.association);
  for (const auto& t : result.tracks) {
    for (auto d : t.detections) result.detection_track[d] = static_cast<long>(t.id);
  }
  Scene out = attach_features(scene, result.tracks, cloud, params.registration, result.notices, &result.registered);
  return {std::move(out), std::move(result)};
}

inline Detection detection_from_json(const Json& j) {
  try {
    Detection d;
    const auto frame = j.at("frame").get<long long>();
    if (frame < 0) throw Error(ErrorKind::InvalidArgument, "detection frame must be >= 0");
    d.frame = static_cast<std::size_t>(frame);
    d.label = j.at("label").get<std::string>();
    d.confidence = j.at("confidence").get<double>();
    for (const auto& p : j.at("polygon")) {
      if (!p.is_array() || p.size() != 2) throw Error(ErrorKind::InvalidArgument, "polygon vertices must be [u, v]");
      d.polygon.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    return d;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("malformed detection: ") + e.what());
  }
}

inline Json detection_to_json(const Detection& d) {
  Json poly = Json::array();
  for (const auto& p : d.polygon) poly.push_back({p.x(), p.y()});
  return {{"frame", d.frame}, {"label", d.label}, {"confidence", d.confidence}, {"polygon", poly}};
}

/// Line-delimited JSON; blank lines are ignored.
inline std::vector<Detection> read_detections(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::vector<Detection> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(detection_from_json(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::InvalidArgument, "'" + path.string() + "' line " + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.kind(), "'" + path.string() + "' line " + std::to_string(lineno) + ": " + e.message());
    }
  }
  return out;
}

inline void write_detections(const std::filesystem::path& path, const std::vector<Detection>& detections) {
  std::string text;
  for (const auto& d : detections) text += detection_to_json(d).dump() + "\n";
  write_text_file(path, text);
}

}  // namespace radiant
