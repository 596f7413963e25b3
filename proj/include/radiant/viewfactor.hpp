#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "radiant/bvh.hpp"
#include "radiant/errors.hpp"
#include "radiant/parallel.hpp"
#include "radiant/random.hpp"
#include "radiant/scene.hpp"

namespace radiant {

inline constexpr std::uint64_t kDefaultRays = 100'000;
inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr std::uint64_t kMinRecommendedRays = 1'000;
inline constexpr double kMinClearance = 0.01;  // m

/// Isotropic unit vector for ray `index` of stream `seed`.
inline Vec3 direction_at(std::uint64_t seed, std::uint64_t index) {
  const CounterRng rng(seed, 0x5350484552455f31ull);
  const double z = 1.0 - 2.0 * rng.uniform(2 * index);
  const double phi = 2.0 * kPi * rng.uniform(2 * index + 1);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

/// Directions uniformly distributed over the unit sphere; deterministic in (n, seed).
inline std::vector<Vec3> sample_directions(std::uint64_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "direction count must be at least 1");
  std::vector<Vec3> dirs;
  dirs.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) dirs.push_back(direction_at(seed, i));
  return dirs;
}

struct RayHit {
  std::string region;  // surface or feature id
  double distance = 0.0;
};

/// View factors from one observation point. Features are tallied apart from
/// their parent surface, so a surface entry already excludes its features.
struct ViewFactorSet {
  std::map<std::string, double> entries;
  std::map<std::string, std::uint64_t> counts;
  double total_hit_fraction = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t n_rays = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  double miss_fraction() const { return static_cast<double>(n_rays - hits) / static_cast<double>(n_rays); }
  double at(const std::string& id) const {
    const auto it = entries.find(id);
    return it == entries.end() ? 0.0 : it->second;
  }
};

struct ViewFactorOptions {
  std::uint64_t n_rays = kDefaultRays;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
  Acceleration acceleration = Acceleration::Bvh;
};

/// Index of a surface or one of its features.
struct RegionRef {
  int surface = -1;
  int feature = -1;  // -1: the envelope itself
};

/// Ray-casting engine bound to one scene. Immutable and shareable across threads.
class ViewFactorEngine {
 public:
  explicit ViewFactorEngine(const Scene& scene, Acceleration accel = Acceleration::Bvh) : scene_(&scene) {
    std::vector<RayPolygon> surfaces, features;
    for (std::size_t i = 0; i < scene.size(); ++i) {
      const SurfaceGeometry& g = scene.geometry(i);
      surfaces.push_back(RayPolygon::make(g.frame, g.outline, static_cast<int>(i)));
      for (std::size_t j = 0; j < g.features.size(); ++j) {
        feature_owner_.push_back({static_cast<int>(i), static_cast<int>(j)});
        features.push_back(RayPolygon::make(g.frame, g.features[j], static_cast<int>(feature_owner_.size() - 1)));
      }
    }
    surfaces_ = PolygonRayCaster(std::move(surfaces), accel);
    features_ = PolygonRayCaster(std::move(features), accel);
    region_offset_.resize(scene.size());
    std::size_t next = 0;
    for (std::size_t i = 0; i < scene.size(); ++i) {
      region_offset_[i] = next;
      next += 1 + scene.surface(i).features.size();
    }
    region_count_ = next;
  }

  const Scene& scene() const { return *scene_; }
  std::size_t region_count() const { return region_count_; }

  std::size_t region_index(RegionRef r) const {
    return region_offset_[static_cast<std::size_t>(r.surface)] + static_cast<std::size_t>(r.feature + 1);
  }

  const std::string& region_id(RegionRef r) const {
    const Surface& s = scene_->surface(static_cast<std::size_t>(r.surface));
    return r.feature < 0 ? s.id : s.features[static_cast<std::size_t>(r.feature)].id;
  }

  RegionRef region_at(std::size_t index) const {
    for (std::size_t i = 0; i < region_offset_.size(); ++i) {
      const std::size_t span = 1 + scene_->surface(i).features.size();
      if (index < region_offset_[i] + span) {
        return {static_cast<int>(i), static_cast<int>(index - region_offset_[i]) - 1};
      }
    }
    throw Error(ErrorKind::InvalidArgument, "region index out of range");
  }

  /// Nearest surface hit, resolved to the feature containing the hit point if any.
  std::optional<std::pair<RegionRef, double>> trace(const Vec3& origin, const Vec3& dir) const {
    const auto hit = surfaces_.nearest(origin, dir);
    if (!hit) return std::nullopt;
    const int s = surfaces_.primitives()[hit->index].tag;
    const SurfaceGeometry& g = scene_->geometry(static_cast<std::size_t>(s));
    for (std::size_t j = 0; j < g.features.size(); ++j) {
      if (point_in_polygon(hit->local, g.features[j], 1e-9)) return {{{s, static_cast<int>(j)}, hit->distance}};
    }
    return {{{s, -1}, hit->distance}};
  }

  /// Nearest surface hit ignoring features.
  std::optional<std::pair<int, double>> trace_envelope(const Vec3& origin, const Vec3& dir) const {
    const auto hit = surfaces_.nearest(origin, dir);
    if (!hit) return std::nullopt;
    return {{surfaces_.primitives()[hit->index].tag, hit->distance}};
  }

  /// Feature polygon hit when no surface is strictly closer.
  std::optional<RegionRef> trace_feature(const Vec3& origin, const Vec3& dir) const {
    const auto fh = features_.nearest(origin, dir);
    if (!fh) return std::nullopt;
    const auto sh = surfaces_.nearest(origin, dir);
    constexpr double kCoplanarSlack = 1e-9;
    if (sh && sh->distance < fh->distance - kCoplanarSlack * std::max(1.0, fh->distance)) return std::nullopt;
    const auto& owner = feature_owner_[static_cast<std::size_t>(features_.primitives()[fh->index].tag)];
    return owner;
  }

  enum class Tally { Native, EnvelopeOnly, FeatureOnly };

  /// Per-region ray counts (indexed by region_index). Batches are summed as integers,
  /// so the result does not depend on `threads`.
  std::vector<std::uint64_t> tally(const Vec3& point, std::uint64_t n_rays, std::uint64_t seed, Tally mode,
                                   unsigned threads = 1) const {
    constexpr std::uint64_t kBatch = 1 << 14;
    const std::uint64_t batches = (n_rays + kBatch - 1) / kBatch;
    std::vector<std::vector<std::uint64_t>> partial(batches, std::vector<std::uint64_t>(region_count_, 0));
    parallel_for(batches, threads, [&](std::size_t b) {
      auto& counts = partial[b];
      const std::uint64_t end = std::min<std::uint64_t>(n_rays, (b + 1) * kBatch);
      for (std::uint64_t k = b * kBatch; k < end; ++k) {
        const Vec3 dir = direction_at(seed, k);
        switch (mode) {
          case Tally::Native:
            if (auto hit = trace(point, dir)) ++counts[region_index(hit->first)];
            break;
          case Tally::EnvelopeOnly:
            if (auto hit = trace_envelope(point, dir)) ++counts[region_index({hit->first, -1})];
            break;
          case Tally::FeatureOnly:
            if (auto hit = trace_feature(point, dir)) ++counts[region_index(*hit)];
            break;
        }
      }
    });
    std::vector<std::uint64_t> total(region_count_, 0);
    for (const auto& p : partial) {
      for (std::size_t r = 0; r < region_count_; ++r) total[r] += p[r];
    }
    return total;
  }

  /// Throws OutOfDomain when `point` is not a valid observation point.
  void check_observation_point(const Vec3& point) const {
    if (!point.allFinite()) throw Error(ErrorKind::OutOfDomain, "observation point is not finite");
    if (scene_->closed_enclosure() && !scene_->bounds().strictly_contains(point)) {
      throw Error(ErrorKind::OutOfDomain, "observation point lies outside the enclosure bounds");
    }
    if (scene_->distance_to_geometry(point) < kMinClearance) {
      throw Error(ErrorKind::OutOfDomain, "observation point is within 1 cm of a surface");
    }
  }

  ViewFactorSet view_factors(const Vec3& point, const ViewFactorOptions& opt) const {
    if (opt.n_rays == 0) throw Error(ErrorKind::InvalidArgument, "n_rays must be at least 1");
    check_observation_point(point);
    const auto counts = tally(point, opt.n_rays, opt.seed, Tally::Native, opt.threads);
    return to_set(counts, opt);
  }

  ViewFactorSet to_set(const std::vector<std::uint64_t>& counts, const ViewFactorOptions& opt) const {
    ViewFactorSet out;
    out.n_rays = opt.n_rays;
    out.seed = opt.seed;
    const double n = static_cast<double>(opt.n_rays);
    for (std::size_t r = 0; r < counts.size(); ++r) {
      const std::string& id = region_id(region_at(r));
      out.counts[id] = counts[r];
      out.entries[id] = static_cast<double>(counts[r]) / n;
      out.hits += counts[r];
    }
    out.total_hit_fraction = static_cast<double>(out.hits) / n;
    if (opt.n_rays < kMinRecommendedRays) {
      out.warnings.push_back("n_rays below " + std::to_string(kMinRecommendedRays) + ": estimator is noisy");
    }
    if (scene_->closed_enclosure() && out.hits != out.n_rays) {
      out.warnings.push_back("closed enclosure leaked " + std::to_string(out.n_rays - out.hits) + " rays");
    }
    return out;
  }

 private:
  const Scene* scene_;
  PolygonRayCaster surfaces_;
  PolygonRayCaster features_;
  std::vector<RegionRef> feature_owner_;
  std::vector<std::size_t> region_offset_;
  std::size_t region_count_ = 0;
};

/// Nearest intersection of a ray with the scene, or nullopt for a miss.
inline std::optional<RayHit> intersect_ray(const Vec3& origin, const Vec3& direction, const Scene& scene) {
  const ViewFactorEngine engine(scene, Acceleration::Flat);
  const auto hit = engine.trace(origin, direction);
  if (!hit) return std::nullopt;
  return RayHit{engine.region_id(hit->first), hit->second};
}

inline ViewFactorSet view_factors(const Vec3& point, const Scene& scene, std::uint64_t n_rays = kDefaultRays,
                                  std::uint64_t seed = kDefaultSeed, unsigned threads = 1) {
  const ViewFactorEngine engine(scene);
  return engine.view_factors(point, {n_rays, seed, threads, Acceleration::Bvh});
}

/// Solid angle of the rectangle [0,a]x[0,b] seen from height c above its corner.
inline double corner_rectangle_solid_angle(double a, double b, double c) {
  if (a == 0.0 || b == 0.0 || c == 0.0) return 0.0;
  return std::atan(a * b / (c * std::sqrt(a * a + b * b + c * c)));
}

/// Exact isotropic-point view factor of a rectangle, F = solid angle / 4 pi.
/// Used as an oracle for the Monte Carlo estimate.
inline double analytic_rectangle_view_factor(const Vec3& point, const Surface& rect) {
  if (rect.corners.size() != 4) throw Error(ErrorKind::InvalidArgument, "rectangle needs exactly 4 corners");
  const Vec3& p0 = rect.corners[0];
  const Vec3 e1 = rect.corners[1] - p0;
  const Vec3 e2 = rect.corners[3] - p0;
  const double a = e1.norm(), b = e2.norm();
  const double scale = std::max(a, b);
  if (a == 0.0 || b == 0.0 || std::abs(e1.dot(e2)) > 1e-9 * scale * scale ||
      (rect.corners[2] - (p0 + e1 + e2)).norm() > 1e-9 * scale) {
    throw Error(ErrorKind::InvalidArgument, "surface '" + rect.id + "' is not a rectangle");
  }
  const Vec3 u = e1 / a, v = e2 / b;
  const Vec3 n = u.cross(v);
  const Vec3 d = point - p0;
  const double c = std::abs(d.dot(n));
  if (c == 0.0) return 0.0;
  const double x = d.dot(u), y = d.dot(v);
  // signed corner solid angle with the foot of the perpendicular as origin
  auto corner = [c](double dx, double dy) {
    const double s = (dx < 0 ? -1.0 : 1.0) * (dy < 0 ? -1.0 : 1.0);
    return s * corner_rectangle_solid_angle(std::abs(dx), std::abs(dy), c);
  };
  const double omega = corner(a - x, b - y) - corner(-x, b - y) - corner(a - x, -y) + corner(-x, -y);
  return omega / (4.0 * kPi);
}

}  // namespace radiant
