#pragma once

// Box-room renderer used as ground truth for fusion, segmentation and the
// end-to-end pipeline. Depth and thermal pixels come from an analytic
// ray/box exit computation, independent of the library's ray caster.

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "radiant/camera.hpp"
#include "radiant/frame_io.hpp"
#include "radiant/random.hpp"
#include "radiant/scene.hpp"
#include "radiant/segmentation.hpp"
#include "support/fixtures.hpp"

namespace radiant::testing {

struct RoomSpec {
  Vec3 lo{0.0, 0.0, 0.0};
  Vec3 hi{4.0, 3.0, 2.5};
  std::map<std::string, double> temperatures{{"floor", 294.0},   {"ceiling", 297.0}, {"wall-x0", 292.5},
                                             {"wall-x1", 293.0}, {"wall-y0", 294.5}, {"wall-y1", 295.0}};
  bool with_feature = true;
  // hot rectangle on wall-x1 (x = hi.x), spanning y in [y0, y1], z in [z0, z1]
  double feature_y0 = 1.0, feature_y1 = 2.0, feature_z0 = 1.2, feature_z1 = 1.7;
  double feature_temperature = 318.0;
  std::string feature_label = "window";
};

inline Scene declarative_scene(const RoomSpec& room) {
  auto surfaces = box_surfaces(room.lo, room.hi, 293.0);
  for (auto& s : surfaces) s.temperature_k = room.temperatures.at(s.id);
  if (room.with_feature) {
    find_surface(surfaces, "wall-x1")
        .features.push_back(feature_rect("feature-0", room.feature_label,
                                         Vec3(room.hi.x(), room.feature_y0, room.feature_z0),
                                         Vec3(0, room.feature_y1 - room.feature_y0, 0),
                                         Vec3(0, 0, room.feature_z1 - room.feature_z0), room.feature_temperature));
  }
  return Scene(std::move(surfaces), true);
}

struct BoxHit {
  double t = 0.0;
  Vec3 point;
  std::string face;
};

/// Exit point of a ray starting inside the box.
inline BoxHit box_exit(const RoomSpec& room, const Vec3& o, const Vec3& d) {
  static const std::array<std::array<const char*, 2>, 3> names{{{"wall-x0", "wall-x1"}, {"wall-y0", "wall-y1"},
                                                               {"floor", "ceiling"}}};
  BoxHit best;
  best.t = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) continue;
    const bool up = d[a] > 0.0;
    const double t = ((up ? room.hi[a] : room.lo[a]) - o[a]) / d[a];
    if (t < best.t) {
      best.t = t;
      best.face = names[a][up ? 1 : 0];
    }
  }
  best.point = o + best.t * d;
  return best;
}

inline bool in_feature(const RoomSpec& room, const Vec3& p) {
  return room.with_feature && p.y() >= room.feature_y0 && p.y() <= room.feature_y1 && p.z() >= room.feature_z0 &&
         p.z() <= room.feature_z1;
}

inline double true_temperature(const RoomSpec& room, const BoxHit& hit) {
  if (hit.face == "wall-x1" && in_feature(room, hit.point)) return room.feature_temperature;
  return room.temperatures.at(hit.face);
}

/// Distance from an interior point to the nearest wall, and that wall's temperature there.
inline std::pair<double, double> nearest_truth(const RoomSpec& room, const Vec3& p) {
  static const std::array<std::array<const char*, 2>, 3> names{{{"wall-x0", "wall-x1"}, {"wall-y0", "wall-y1"},
                                                               {"floor", "ceiling"}}};
  double best = std::numeric_limits<double>::infinity();
  std::string face;
  for (int a = 0; a < 3; ++a) {
    for (int side = 0; side < 2; ++side) {
      const double dist = std::abs(p[a] - (side ? room.hi[a] : room.lo[a]));
      if (dist < best) {
        best = dist;
        face = names[a][side];
      }
    }
  }
  BoxHit h{0.0, p, face};
  return {best, true_temperature(room, h)};
}

inline CameraModel synthetic_cameras() {
  CameraModel cams;
  cams.depth = {160.0, 160.0, 159.5, 119.5, 320, 240};
  cams.thermal = {170.0, 170.0, 159.5, 119.5, 320, 240};
  cams.thermal_from_depth.translation = Vec3(-0.02, 0.0, 0.0);  // 2 cm baseline
  return cams;
}

/// world <- camera for a camera at `position` looking along yaw/pitch (degrees);
/// camera axes: x right, y down, z forward.
inline RigidTransform look_pose(const Vec3& position, double yaw_deg, double pitch_deg) {
  const double y = deg_to_rad(yaw_deg), p = deg_to_rad(pitch_deg);
  const Vec3 forward(std::cos(p) * std::cos(y), std::cos(p) * std::sin(y), std::sin(p));
  const Vec3 right = forward.cross(Vec3::UnitZ()).normalized();
  const Vec3 down = forward.cross(right);
  RigidTransform t;
  t.rotation.col(0) = right;
  t.rotation.col(1) = down;
  t.rotation.col(2) = forward;
  t.translation = position;
  return t;
}

/// 16 frames circling the room center at +/-25 deg pitch, then 4 steep up/down views.
inline std::vector<RigidTransform> room_trajectory(const RoomSpec& room, int n = 20) {
  const Vec3 c = 0.5 * (room.lo + room.hi);
  std::vector<RigidTransform> poses;
  for (int k = 0; k < n; ++k) {
    if (k < 16) {
      const double yaw = 22.5 * k;
      const double th = deg_to_rad(yaw);
      const Vec3 pos(c.x() + 0.25 * std::cos(th), c.y() + 0.25 * std::sin(th), 1.3);
      poses.push_back(look_pose(pos, yaw, k % 2 == 0 ? 25.0 : -25.0));
    } else {
      const double yaw = 90.0 * (k - 16);
      poses.push_back(look_pose(Vec3(c.x(), c.y(), 1.3), yaw, k % 2 == 0 ? -75.0 : 75.0));
    }
  }
  return poses;
}

inline FrameBundle render_frame(const RoomSpec& room, const CameraModel& cams, const RigidTransform& pose) {
  FrameBundle f;
  f.pose = pose;
  f.depth = DepthImage(cams.depth.width, cams.depth.height, 0);
  for (int v = 0; v < cams.depth.height; ++v) {
    for (int u = 0; u < cams.depth.width; ++u) {
      const Vec3 dc((u - cams.depth.cx) / cams.depth.fx, (v - cams.depth.cy) / cams.depth.fy, 1.0);
      const BoxHit hit = box_exit(room, pose.translation, pose.rotation * dc);
      const long mm = std::lround(hit.t * 1000.0);
      f.depth.at(u, v) = (mm > 0 && mm < 65536) ? static_cast<std::uint16_t>(mm) : 0;
    }
  }
  const RigidTransform world_from_thermal = pose * cams.thermal_from_depth.inverse();
  f.thermal = ThermalImage(cams.thermal.width, cams.thermal.height, 0);
  for (int v = 0; v < cams.thermal.height; ++v) {
    for (int u = 0; u < cams.thermal.width; ++u) {
      const Vec3 dc((u - cams.thermal.cx) / cams.thermal.fx, (v - cams.thermal.cy) / cams.thermal.fy, 1.0);
      const BoxHit hit = box_exit(room, world_from_thermal.translation, world_from_thermal.rotation * dc);
      f.thermal.at(u, v) = static_cast<std::uint16_t>(std::lround(true_temperature(room, hit) * 100.0));
    }
  }
  return f;
}

/// Feature outline as seen by the depth camera, clipped to the image; nullopt when not visible.
inline std::optional<Polygon2> feature_mask(const RoomSpec& room, const CameraModel& cams, const RigidTransform& pose,
                                            double min_area_px = 50.0) {
  if (!room.with_feature) return std::nullopt;
  const std::array<Vec3, 4> corners{Vec3(room.hi.x(), room.feature_y0, room.feature_z0),
                                    Vec3(room.hi.x(), room.feature_y1, room.feature_z0),
                                    Vec3(room.hi.x(), room.feature_y1, room.feature_z1),
                                    Vec3(room.hi.x(), room.feature_y0, room.feature_z1)};
  const RigidTransform cam_from_world = pose.inverse();
  Polygon2 poly;
  for (const auto& c : corners) {
    const Vec3 pc = cam_from_world * c;
    if (pc.z() < 0.05) return std::nullopt;
    poly.push_back(*cams.depth.project(pc));
  }
  const double w = cams.depth.width - 1, h = cams.depth.height - 1;
  const Polygon2 image{Vec2(0, 0), Vec2(w, 0), Vec2(w, h), Vec2(0, h)};
  Polygon2 clipped = clip_polygon(ensure_ccw(poly), image);
  if (clipped.size() < 3 || area(clipped) < min_area_px) return std::nullopt;
  for (auto& q : clipped) q = q.cwiseMax(Vec2(0, 0)).cwiseMin(Vec2(w, h));
  return clipped;
}

struct SyntheticDataset {
  RoomSpec room;
  CameraModel cams;
  std::vector<RigidTransform> true_poses;
  std::vector<FrameBundle> frames;  // poses carry the noise
  std::vector<Detection> detections;
};

/// Renders the trajectory; frames after the first get a random rotation of up
/// to `noise_deg` and a translation of up to `noise_m` on their recorded pose.
inline SyntheticDataset make_dataset(const RoomSpec& room = {}, int n_frames = 20, double noise_deg = 0.5,
                                     double noise_m = 0.005, std::uint64_t seed = 7) {
  SyntheticDataset ds;
  ds.room = room;
  ds.cams = synthetic_cameras();
  ds.true_poses = room_trajectory(room, n_frames);
  SequentialRng rng(seed);
  for (int k = 0; k < n_frames; ++k) {
    FrameBundle f = render_frame(room, ds.cams, ds.true_poses[k]);
    f.timestamp = 0.1 * k;
    if (k > 0 && (noise_deg > 0.0 || noise_m > 0.0)) {
      const Vec3 axis = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)).normalized();
      const double angle = deg_to_rad(rng.uniform(-noise_deg, noise_deg));
      const Vec3 shift(rng.uniform(-noise_m, noise_m), rng.uniform(-noise_m, noise_m), rng.uniform(-noise_m, noise_m));
      f.pose = f.pose * RigidTransform::from_axis_angle(axis, angle, shift);
    }
    ds.frames.push_back(std::move(f));
    if (auto mask = feature_mask(room, ds.cams, ds.true_poses[k])) {
      Detection d;
      d.frame = static_cast<std::size_t>(k);
      d.label = (ds.detections.size() % 4 == 3) ? "painting" : room.feature_label;
      d.confidence = d.label == room.feature_label ? 0.9 : 0.6;
      d.polygon = *mask;
      ds.detections.push_back(std::move(d));
    }
  }
  return ds;
}

inline void write_dataset(const std::filesystem::path& dir, const SyntheticDataset& ds) {
  radiant::write_dataset(dir, ds.cams, ds.frames);
  write_detections(dir / "detections.jsonl", ds.detections);
}

}  // namespace radiant::testing
