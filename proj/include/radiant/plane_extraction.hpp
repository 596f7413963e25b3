#pragma once

#include <Eigen/Eigenvalues>

#include <cstdint>
#include <string>
#include <vector>

#include "radiant/geometry.hpp"
#include "radiant/random.hpp"
#include "radiant/scene.hpp"

namespace radiant {

struct PlaneExtractionParams {
  double distance_threshold = kDefaultDistanceThreshold;
  std::size_t min_inliers = 500;
  std::size_t max_planes = 10;
  std::uint64_t seed = 42;
  std::size_t iterations = 1000;
  std::size_t score_sample = 4000;  // candidate planes are scored on a subsample
};

namespace detail {

struct PlaneFit {
  Plane plane;
  Vec3 centroid;
  Eigen::Vector3d eigenvalues;  // ascending
};

inline PlaneFit fit_plane_pca(const std::vector<Vec3>& pts, const std::vector<std::size_t>& idx) {
  Vec3 centroid = Vec3::Zero();
  for (auto i : idx) centroid += pts[i];
  centroid /= static_cast<double>(idx.size());
  Mat3 cov = Mat3::Zero();
  for (auto i : idx) {
    const Vec3 d = pts[i] - centroid;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(idx.size());
  Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
  PlaneFit fit;
  fit.centroid = centroid;
  fit.eigenvalues = solver.eigenvalues();
  fit.plane.normal = solver.eigenvectors().col(0).normalized();
  fit.plane.offset = fit.plane.normal.dot(centroid);
  return fit;
}

}  // namespace detail

/// Throws DegenerateGeometry when all points are (nearly) collinear.
inline void check_not_collinear(const std::vector<Vec3>& pts) {
  std::vector<std::size_t> all(pts.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto fit = detail::fit_plane_pca(pts, all);
  const double largest = fit.eigenvalues[2];
  if (!(largest > 0.0) || fit.eigenvalues[1] <= 1e-12 * largest) {
    throw Error(ErrorKind::DegenerateGeometry, "point cloud is collinear");
  }
}

/// Sequential RANSAC. Each accepted plane's inliers are removed before the next
/// fit; corners are the minimum-area rectangle of the projected inliers.
inline std::vector<Surface> extract_planar_surfaces(const ThermalPointCloud& cloud,
                                                    const PlaneExtractionParams& params = {}) {
  cloud.validate();
  if (cloud.empty()) return {};
  const auto& pts = cloud.points;
  if (pts.size() >= 3) check_not_collinear(pts);
  if (pts.size() < params.min_inliers || params.min_inliers < 3) {
    if (params.min_inliers < 3) throw Error(ErrorKind::InvalidArgument, "min_inliers must be at least 3");
    return {};
  }

  Vec3 cloud_centroid = Vec3::Zero();
  for (const auto& p : pts) cloud_centroid += p;
  cloud_centroid /= static_cast<double>(pts.size());

  std::vector<std::size_t> remaining(pts.size());
  for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;

  std::vector<Surface> surfaces;
  const double thr = params.distance_threshold;

  for (std::size_t round = 0; round < params.max_planes && remaining.size() >= params.min_inliers; ++round) {
    SequentialRng rng(params.seed, round);

    std::vector<std::size_t> sample;
    if (remaining.size() <= params.score_sample) {
      sample = remaining;
    } else {
      sample.reserve(params.score_sample);
      for (std::size_t k = 0; k < params.score_sample; ++k) sample.push_back(remaining[rng.index(remaining.size())]);
    }

    std::size_t best_score = 0;
    Plane best;
    for (std::size_t it = 0; it < params.iterations; ++it) {
      const Vec3& a = pts[remaining[rng.index(remaining.size())]];
      const Vec3& b = pts[remaining[rng.index(remaining.size())]];
      const Vec3& c = pts[remaining[rng.index(remaining.size())]];
      const Vec3 n = (b - a).cross(c - a);
      const double len = n.norm();
      if (len < 1e-12) continue;
      Plane candidate{n / len, (n / len).dot(a)};
      std::size_t score = 0;
      for (auto i : sample) {
        if (std::abs(candidate.signed_distance(pts[i])) <= thr) ++score;
      }
      if (score > best_score) {
        best_score = score;
        best = candidate;
      }
    }
    if (best_score < 3) break;

    auto collect = [&](const Plane& plane) {
      std::vector<std::size_t> in;
      for (auto i : remaining) {
        if (std::abs(plane.signed_distance(pts[i])) <= thr) in.push_back(i);
      }
      return in;
    };

    std::vector<std::size_t> inliers = collect(best);
    if (inliers.size() < params.min_inliers) break;
    detail::PlaneFit fit;
    for (int refine = 0; refine < 3; ++refine) {
      fit = detail::fit_plane_pca(pts, inliers);
      auto next = collect(fit.plane);
      if (next.size() < 3) break;
      inliers = std::move(next);
    }
    if (inliers.size() < params.min_inliers) break;
    fit = detail::fit_plane_pca(pts, inliers);

    Vec3 normal = fit.plane.normal;
    if (normal.dot(fit.centroid - cloud_centroid) < 0.0) normal = -normal;  // outward for an enclosing room
    const PlaneFrame frame = PlaneFrame::from_normal(fit.centroid, normal);
    std::vector<Vec2> projected;
    projected.reserve(inliers.size());
    for (auto i : inliers) projected.push_back(frame.to_2d(pts[i]));

    Surface s;
    s.id = "surface-" + std::to_string(surfaces.size());
    s.corners = lift_polygon(frame, ensure_ccw(min_area_rectangle(projected)));
    s.temperature_k = 0.0;
    double sum = 0.0;
    for (auto i : inliers) sum += cloud.temperatures[i];
    s.temperature_k = sum / static_cast<double>(inliers.size());
    surfaces.push_back(std::move(s));

    std::vector<char> taken(pts.size(), 0);
    for (auto i : inliers) taken[i] = 1;
    std::erase_if(remaining, [&](std::size_t i) { return taken[i] != 0; });
  }

  // Final envelope temperatures from every cloud point that lies on each polygon.
  for (auto& s : surfaces) {
    try {
      s.temperature_k = surface_temperature(cloud, s, thr);
    } catch (const Error&) {
      // keep the inlier mean
    }
  }
  return surfaces;
}

}  // namespace radiant
