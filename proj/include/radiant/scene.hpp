#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "radiant/errors.hpp"
#include "radiant/geometry.hpp"

namespace radiant {

inline constexpr double kPlanarityTolerance = 0.005;  // m
inline constexpr double kContainmentTolerance = 0.005;  // m
inline constexpr double kOverlapAreaTolerance = 1e-6;  // m^2
inline constexpr double kDefaultDistanceThreshold = 0.005;  // m

/// Coplanar sub-region of a surface with its own temperature.
struct ThermalFeature {
  std::string id;
  std::string label;
  Polygon3 corners;
  double temperature_k = 0.0;
};

/// Planar envelope polygon. `temperature_k` excludes feature regions.
struct Surface {
  std::string id;
  Polygon3 corners;
  double temperature_k = 0.0;
  std::vector<ThermalFeature> features;
};

/// Points with per-point temperature (K) and an optional region tag.
struct ThermalPointCloud {
  std::vector<Vec3> points;
  std::vector<double> temperatures;
  std::vector<std::string> regions;  // empty, or one per point

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_regions() const { return !regions.empty(); }

  void push_back(const Vec3& p, double t) {
    points.push_back(p);
    temperatures.push_back(t);
  }

  void validate() const {
    if (points.size() != temperatures.size()) {
      throw Error(ErrorKind::InvalidArgument, "point cloud has mismatched point/temperature counts");
    }
    if (!regions.empty() && regions.size() != points.size()) {
      throw Error(ErrorKind::InvalidArgument, "point cloud has mismatched region tag count");
    }
    for (double t : temperatures) {
      if (!(t > 0.0) || !std::isfinite(t)) {
        throw Error(ErrorKind::InvalidArgument, "point cloud temperature must be finite and > 0 K");
      }
    }
  }
};

/// Precomputed chart of a surface and its features, shared by ray casting and
/// point classification.
struct SurfaceGeometry {
  PlaneFrame frame;
  Polygon2 outline;
  std::vector<Polygon2> features;
  Aabb3 bounds;

  Plane plane() const { return frame.plane(); }

  static SurfaceGeometry build(const Surface& s) {
    SurfaceGeometry g;
    g.frame = PlaneFrame::from_polygon(s.corners);
    Vec3 centroid = Vec3::Zero();
    for (const auto& c : s.corners) centroid += c;
    centroid /= static_cast<double>(s.corners.size());
    // anchor the chart on the mean plane, keeping u along the first edge
    g.frame.origin = g.frame.origin + g.frame.normal * g.frame.normal.dot(centroid - g.frame.origin);
    g.outline = project_polygon(g.frame, s.corners);
    for (const auto& f : s.features) g.features.push_back(project_polygon(g.frame, f.corners));
    for (const auto& c : s.corners) g.bounds.expand(c);
    return g;
  }

  /// -1: envelope, j >= 0: feature j, nullopt: outside the polygon or off-plane.
  std::optional<int> classify(const Vec3& p, double plane_tolerance) const {
    if (std::abs(frame.normal.dot(p - frame.origin)) > plane_tolerance) return std::nullopt;
    return classify_in_plane(frame.to_2d(p));
  }

  std::optional<int> classify_in_plane(const Vec2& q, double boundary_tol = 1e-9) const {
    if (!point_in_polygon(q, outline, boundary_tol)) return std::nullopt;
    for (std::size_t j = 0; j < features.size(); ++j) {
      if (point_in_polygon(q, features[j], boundary_tol)) return static_cast<int>(j);
    }
    return -1;
  }
};

inline void validate_surface(const Surface& s) {
  if (s.id.empty()) throw Error(ErrorKind::InvalidArgument, "surface id must not be empty");
  if (s.corners.size() < 3) {
    throw Error(ErrorKind::InvalidArgument, "surface '" + s.id + "' needs at least 3 corners");
  }
  for (const auto& c : s.corners) {
    if (!c.allFinite()) throw Error(ErrorKind::InvalidArgument, "surface '" + s.id + "' has a non-finite corner");
  }
  if (!(s.temperature_k > 0.0) || !std::isfinite(s.temperature_k)) {
    throw Error(ErrorKind::InvalidArgument, "surface '" + s.id + "' temperature must be > 0 K");
  }
  const SurfaceGeometry g = SurfaceGeometry::build(s);
  for (const auto& c : s.corners) {
    if (std::abs(g.frame.normal.dot(c - g.frame.origin)) > kPlanarityTolerance) {
      throw Error(ErrorKind::DegenerateGeometry, "surface '" + s.id + "' corners are not coplanar");
    }
  }
  if (!is_simple(g.outline)) {
    throw Error(ErrorKind::DegenerateGeometry, "surface '" + s.id + "' polygon is not simple");
  }
  for (std::size_t j = 0; j < s.features.size(); ++j) {
    const ThermalFeature& f = s.features[j];
    if (f.id.empty()) throw Error(ErrorKind::InvalidArgument, "feature id must not be empty");
    if (f.corners.size() < 3) {
      throw Error(ErrorKind::InvalidArgument, "feature '" + f.id + "' needs at least 3 corners");
    }
    if (!(f.temperature_k > 0.0) || !std::isfinite(f.temperature_k)) {
      throw Error(ErrorKind::InvalidArgument, "feature '" + f.id + "' temperature must be > 0 K");
    }
    for (const auto& c : f.corners) {
      if (std::abs(g.frame.normal.dot(c - g.frame.origin)) > kPlanarityTolerance) {
        throw Error(ErrorKind::InconsistentGeometry,
                    "feature '" + f.id + "' does not lie in the plane of surface '" + s.id + "'");
      }
      if (!point_in_polygon(g.frame.to_2d(c), g.outline, kContainmentTolerance)) {
        throw Error(ErrorKind::InconsistentGeometry,
                    "feature '" + f.id + "' extends outside surface '" + s.id + "'");
      }
    }
    if (!is_simple(g.features[j])) {
      throw Error(ErrorKind::DegenerateGeometry, "feature '" + f.id + "' polygon is not simple");
    }
    for (std::size_t k = 0; k < j; ++k) {
      if (intersection_area(g.features[j], g.features[k]) > kOverlapAreaTolerance) {
        throw Error(ErrorKind::InconsistentGeometry,
                    "features '" + f.id + "' and '" + s.features[k].id + "' overlap");
      }
    }
  }
}

/// Immutable validated collection of surfaces with cached geometry.
class Scene {
 public:
  Scene() = default;

  explicit Scene(std::vector<Surface> surfaces, bool closed_enclosure = false)
      : surfaces_(std::move(surfaces)), closed_(closed_enclosure) {
    std::unordered_set<std::string> ids;
    for (const auto& s : surfaces_) {
      validate_surface(s);
      if (!ids.insert(s.id).second) throw Error(ErrorKind::InvalidArgument, "duplicate id '" + s.id + "'");
      for (const auto& f : s.features) {
        if (!ids.insert(f.id).second) throw Error(ErrorKind::InvalidArgument, "duplicate id '" + f.id + "'");
      }
      geometry_.push_back(SurfaceGeometry::build(s));
      bounds_.expand(geometry_.back().bounds);
    }
  }

  const std::vector<Surface>& surfaces() const { return surfaces_; }
  const Surface& surface(std::size_t i) const { return surfaces_.at(i); }
  const SurfaceGeometry& geometry(std::size_t i) const { return geometry_.at(i); }
  std::size_t size() const { return surfaces_.size(); }
  bool empty() const { return surfaces_.empty(); }
  const Aabb3& bounds() const { return bounds_; }
  bool closed_enclosure() const { return closed_; }

  std::size_t feature_count() const {
    std::size_t n = 0;
    for (const auto& s : surfaces_) n += s.features.size();
    return n;
  }

  /// Same geometry with every feature removed (envelopes keep their temperatures).
  Scene without_features() const {
    std::vector<Surface> stripped = surfaces_;
    for (auto& s : stripped) s.features.clear();
    return Scene(std::move(stripped), closed_);
  }

  /// Shortest distance from `p` to any surface polygon.
  double distance_to_geometry(const Vec3& p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : geometry_) best = std::min(best, point_polygon_distance(p, g.frame, g.outline));
    return best;
  }

 private:
  std::vector<Surface> surfaces_;
  std::vector<SurfaceGeometry> geometry_;
  Aabb3 bounds_;
  bool closed_ = false;
};

namespace detail {

inline double mean_region_temperature(const ThermalPointCloud& cloud, const SurfaceGeometry& g, int region,
                                      double distance_threshold, const std::string& id) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto cls = g.classify(cloud.points[i], distance_threshold);
    if (cls && *cls == region) {
      sum += cloud.temperatures[i];
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorKind::MissingCoverage, "no cloud points cover region '" + id + "'");
  return sum / static_cast<double>(count);
}

}  // namespace detail

/// Mean temperature of cloud points on the surface but outside every feature.
inline double surface_temperature(const ThermalPointCloud& cloud, const Surface& surface,
                                  double distance_threshold = kDefaultDistanceThreshold) {
  const SurfaceGeometry g = SurfaceGeometry::build(surface);
  return detail::mean_region_temperature(cloud, g, -1, distance_threshold, surface.id);
}

/// Mean temperature of cloud points inside `feature` (which must belong to `surface`).
inline double feature_temperature(const ThermalPointCloud& cloud, const Surface& surface,
                                  const ThermalFeature& feature,
                                  double distance_threshold = kDefaultDistanceThreshold) {
  const SurfaceGeometry g = SurfaceGeometry::build(surface);
  for (std::size_t j = 0; j < surface.features.size(); ++j) {
    if (surface.features[j].id == feature.id) {
      return detail::mean_region_temperature(cloud, g, static_cast<int>(j), distance_threshold, feature.id);
    }
  }
  // feature not yet attached: classify against it alone
  Surface with_feature = surface;
  with_feature.features = {feature};
  const SurfaceGeometry g2 = SurfaceGeometry::build(with_feature);
  return detail::mean_region_temperature(cloud, g2, 0, distance_threshold, feature.id);
}

}  // namespace radiant
