#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "radiant/geometry.hpp"

namespace radiant {

/// Static 3-d tree over a point set for nearest-neighbour queries.
class KdTree {
 public:
  KdTree() = default;

  explicit KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
    index_.resize(points_.size());
    std::iota(index_.begin(), index_.end(), 0u);
    nodes_.reserve(points_.size());
    if (!points_.empty()) root_ = build(0, static_cast<std::uint32_t>(points_.size()), 0);
  }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Vec3& point(std::size_t i) const { return points_[i]; }

  struct Neighbor {
    std::uint32_t index = std::numeric_limits<std::uint32_t>::max();
    double squared_distance = std::numeric_limits<double>::infinity();
  };

  /// Nearest point within sqrt(max_squared_distance); index is max() when none.
  Neighbor nearest(const Vec3& q, double max_squared_distance = std::numeric_limits<double>::infinity()) const {
    Neighbor best;
    best.squared_distance = max_squared_distance;
    if (root_ >= 0) search(root_, q, best);
    if (best.index == std::numeric_limits<std::uint32_t>::max()) best.squared_distance = std::numeric_limits<double>::infinity();
    return best;
  }

 private:
  struct Node {
    std::uint32_t point = 0;
    std::int32_t left = -1, right = -1;
    std::uint8_t axis = 0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end, int depth) {
    if (begin >= end) return -1;
    // split on the widest axis of this subset
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
    for (std::uint32_t k = begin; k < end; ++k) {
      lo = lo.cwiseMin(points_[index_[k]]);
      hi = hi.cwiseMax(points_[index_[k]]);
    }
    const Vec3 ext = hi - lo;
    int axis = 0;
    if (ext.y() > ext[axis]) axis = 1;
    if (ext.z() > ext[axis]) axis = 2;
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(index_.begin() + begin, index_.begin() + mid, index_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                       const double pa = points_[a][axis], pb = points_[b][axis];
                       return pa < pb || (pa == pb && a < b);
                     });
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({index_[mid], -1, -1, static_cast<std::uint8_t>(axis)});
    const std::int32_t left = build(begin, mid, depth + 1);
    const std::int32_t right = build(mid + 1, end, depth + 1);
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    return id;
  }

  void search(std::int32_t id, const Vec3& q, Neighbor& best) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    const Vec3& p = points_[n.point];
    const double d2 = (p - q).squaredNorm();
    if (d2 < best.squared_distance || (d2 == best.squared_distance && n.point < best.index)) {
      best.squared_distance = d2;
      best.index = n.point;
    }
    const double diff = q[n.axis] - p[n.axis];
    const std::int32_t near = diff <= 0 ? n.left : n.right;
    const std::int32_t far = diff <= 0 ? n.right : n.left;
    if (near >= 0) search(near, q, best);
    if (far >= 0 && diff * diff <= best.squared_distance) search(far, q, best);
  }

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> index_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

}  // namespace radiant
