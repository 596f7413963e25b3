#pragma once

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "radiant/errors.hpp"
#include "radiant/kdtree.hpp"
#include "radiant/rigid_transform.hpp"

namespace radiant {

struct IcpParams {
  int max_iterations = 50;
  double convergence_eps = 1e-6;         // m, minimum RMS improvement per iteration
  double max_correspondence_dist = 0.1;  // m
  // When > 0, each iteration also rejects pairs farther than this multiple of
  // the median pair distance (never below min_correspondence_dist).
  double median_factor = 0.0;
  double min_correspondence_dist = 0.005;  // m
};

struct IcpResult {
  RigidTransform transform;  // maps source into the target frame
  double rms_error = 0.0;    // m, over accepted correspondences
  int iterations = 0;
  std::size_t correspondences = 0;
  bool converged = false;
};

/// Closed-form least-squares rigid transform taking `src` onto `dst`
/// (SVD of the cross-covariance with the reflection fix).
inline RigidTransform best_fit_transform(std::span<const Vec3> src, std::span<const Vec3> dst) {
  if (src.size() != dst.size() || src.size() < 3) {
    throw Error(ErrorKind::InsufficientOverlap, "need at least 3 point pairs");
  }
  Vec3 cs = Vec3::Zero(), cd = Vec3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    cs += src[i];
    cd += dst[i];
  }
  cs /= static_cast<double>(src.size());
  cd /= static_cast<double>(dst.size());
  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) h += (src[i] - cs) * (dst[i] - cd).transpose();

  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  if (!(sv[0] > 0.0) || sv[1] <= 1e-12 * sv[0]) {
    throw Error(ErrorKind::DegenerateGeometry, "correspondence covariance has rank < 2");
  }
  const Mat3 u = svd.matrixU(), v = svd.matrixV();
  Mat3 d = Mat3::Identity();
  if ((v * u.transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  RigidTransform t;
  t.rotation = v * d * u.transpose();
  t.translation = cd - t.rotation * cs;
  return t;
}

namespace detail {

struct Matches {
  std::vector<Vec3> src, dst;
  double rms = 0.0;
};

inline Matches match(std::span<const Vec3> source, const KdTree& tree, const RigidTransform& t, double max_d2,
                     double median_factor = 0.0, double min_d = 0.0) {
  Matches m;
  m.src.reserve(source.size());
  m.dst.reserve(source.size());
  double sum = 0.0;
  for (const auto& p : source) {
    const Vec3 q = t * p;
    const auto nn = tree.nearest(q, max_d2);
    if (nn.index == std::numeric_limits<std::uint32_t>::max()) continue;
    m.src.push_back(q);
    m.dst.push_back(tree.point(nn.index));
    sum += nn.squared_distance;
  }
  if (median_factor > 0.0 && !m.src.empty()) {
    std::vector<double> d2(m.src.size());
    for (std::size_t i = 0; i < d2.size(); ++i) d2[i] = (m.src[i] - m.dst[i]).squaredNorm();
    std::vector<double> sorted = d2;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double cut = std::max(min_d, median_factor * std::sqrt(sorted[sorted.size() / 2]));
    const double cut2 = std::min(max_d2, cut * cut);
    std::size_t w = 0;
    sum = 0.0;
    for (std::size_t i = 0; i < d2.size(); ++i) {
      if (d2[i] > cut2) continue;
      m.src[w] = m.src[i];
      m.dst[w] = m.dst[i];
      sum += d2[i];
      ++w;
    }
    m.src.resize(w);
    m.dst.resize(w);
  }
  m.rms = m.src.empty() ? 0.0 : std::sqrt(sum / static_cast<double>(m.src.size()));
  return m;
}

}  // namespace detail

/// Point-to-point ICP against a prebuilt target tree.
inline IcpResult icp_align(std::span<const Vec3> source, const KdTree& target, const IcpParams& params = {},
                           const RigidTransform& initial = {}) {
  if (source.size() < 3 || target.size() < 3) {
    throw Error(ErrorKind::InsufficientOverlap, "ICP needs at least 3 points in each cloud");
  }
  const double max_d2 = params.max_correspondence_dist * params.max_correspondence_dist;
  IcpResult result;
  result.transform = initial;
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 0; it < params.max_iterations; ++it) {
    const auto m = detail::match(source, target, result.transform, max_d2, params.median_factor,
                                 params.min_correspondence_dist);
    if (m.src.size() < 3) {
      throw Error(ErrorKind::InsufficientOverlap,
                  "only " + std::to_string(m.src.size()) + " correspondences within the cutoff");
    }
    const RigidTransform step = best_fit_transform(m.src, m.dst);
    result.transform = step * result.transform;
    result.iterations = it + 1;

    double sum = 0.0;
    for (std::size_t i = 0; i < m.src.size(); ++i) sum += (step * m.src[i] - m.dst[i]).squaredNorm();
    const double rms = std::sqrt(sum / static_cast<double>(m.src.size()));
    if (previous - rms < params.convergence_eps) {
      result.converged = true;
      break;
    }
    previous = rms;
  }
  const auto final_matches = detail::match(source, target, result.transform, max_d2, params.median_factor,
                                           params.min_correspondence_dist);
  result.rms_error = final_matches.rms;
  result.correspondences = final_matches.src.size();
  return result;
}

inline IcpResult icp_align(std::span<const Vec3> source, std::span<const Vec3> target, const IcpParams& params = {},
                           const RigidTransform& initial = {}) {
  const KdTree tree(std::vector<Vec3>(target.begin(), target.end()));
  return icp_align(source, tree, params, initial);
}

}  // namespace radiant
