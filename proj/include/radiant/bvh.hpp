#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "radiant/geometry.hpp"

namespace radiant {

inline constexpr double kSelfIntersectionEpsilon = 1e-9;  // m
inline constexpr double kMaxHitDistance = 1e4;            // m

/// Planar polygon prepared for ray queries.
struct RayPolygon {
  PlaneFrame frame;
  double offset = 0.0;
  Polygon2 outline;
  Vec2 lo, hi;  // 2D bounds of the outline
  Aabb3 bounds;
  int tag = -1;  // caller-defined payload

  static RayPolygon make(const PlaneFrame& frame, Polygon2 outline, int tag) {
    RayPolygon p;
    p.frame = frame;
    p.offset = frame.normal.dot(frame.origin);
    p.outline = std::move(outline);
    p.lo = Vec2::Constant(std::numeric_limits<double>::infinity());
    p.hi = -p.lo;
    for (const auto& q : p.outline) {
      p.lo = p.lo.cwiseMin(q);
      p.hi = p.hi.cwiseMax(q);
      p.bounds.expand(frame.to_3d(q));
    }
    p.bounds = p.bounds.padded(1e-9);
    p.tag = tag;
    return p;
  }

  /// Distance along the ray, or nullopt. Boundary points count as hits.
  std::optional<double> intersect(const Vec3& origin, const Vec3& dir, Vec2* hit_2d = nullptr) const {
    constexpr double kEdgeTol = 1e-9;
    const double denom = frame.normal.dot(dir);
    if (std::abs(denom) < 1e-14) return std::nullopt;
    const double t = (offset - frame.normal.dot(origin)) / denom;
    if (!(t > kSelfIntersectionEpsilon) || t > kMaxHitDistance) return std::nullopt;
    const Vec2 q = frame.to_2d(origin + t * dir);
    if (q.x() < lo.x() - kEdgeTol || q.y() < lo.y() - kEdgeTol || q.x() > hi.x() + kEdgeTol ||
        q.y() > hi.y() + kEdgeTol) {
      return std::nullopt;
    }
    if (!point_in_polygon(q, outline, kEdgeTol)) return std::nullopt;
    if (hit_2d) *hit_2d = q;
    return t;
  }
};

struct PolygonHit {
  double distance = std::numeric_limits<double>::infinity();
  std::uint32_t index = std::numeric_limits<std::uint32_t>::max();  // into the primitive list
  Vec2 local = Vec2::Zero();
};

enum class Acceleration { Bvh, Flat };

/// Nearest-hit queries over planar polygons. Ties in distance resolve to the
/// lowest primitive index, so BVH and flat traversal agree bit for bit.
class PolygonRayCaster {
 public:
  PolygonRayCaster() = default;

  explicit PolygonRayCaster(std::vector<RayPolygon> prims, Acceleration accel = Acceleration::Bvh)
      : prims_(std::move(prims)), accel_(accel) {
    if (accel_ == Acceleration::Bvh && !prims_.empty()) build();
  }

  const std::vector<RayPolygon>& primitives() const { return prims_; }
  Acceleration acceleration() const { return accel_; }

  std::optional<PolygonHit> nearest(const Vec3& origin, const Vec3& dir) const {
    PolygonHit best;
    if (accel_ == Acceleration::Flat || nodes_.empty()) {
      for (std::uint32_t i = 0; i < prims_.size(); ++i) consider(i, origin, dir, best);
    } else {
      const Vec3 inv(1.0 / dir.x(), 1.0 / dir.y(), 1.0 / dir.z());
      std::array<std::uint32_t, 64> stack;
      std::size_t top = 0;
      stack[top++] = 0;
      while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        if (!node.bounds.hit(origin, inv, kSelfIntersectionEpsilon, std::min(best.distance, kMaxHitDistance))) {
          continue;
        }
        if (node.count > 0) {
          for (std::uint32_t k = 0; k < node.count; ++k) consider(order_[node.first + k], origin, dir, best);
        } else {
          stack[top++] = node.first;
          stack[top++] = node.first + 1;
        }
      }
    }
    if (best.index == std::numeric_limits<std::uint32_t>::max()) return std::nullopt;
    return best;
  }

 private:
  struct Node {
    Aabb3 bounds;
    std::uint32_t first = 0;  // leaf: offset into order_; inner: left child (right = first + 1)
    std::uint32_t count = 0;  // 0 for inner nodes
  };

  void consider(std::uint32_t i, const Vec3& origin, const Vec3& dir, PolygonHit& best) const {
    Vec2 local;
    const auto t = prims_[i].intersect(origin, dir, &local);
    if (!t) return;
    if (*t < best.distance || (*t == best.distance && i < best.index)) {
      best.distance = *t;
      best.index = i;
      best.local = local;
    }
  }

  void build() {
    order_.resize(prims_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    nodes_.reserve(2 * prims_.size());
    nodes_.push_back({});
    build_node(0, 0, static_cast<std::uint32_t>(prims_.size()), 0);
  }

  void build_node(std::uint32_t node_index, std::uint32_t first, std::uint32_t count, int depth) {
    Aabb3 bounds, centroids;
    for (std::uint32_t k = first; k < first + count; ++k) {
      bounds.expand(prims_[order_[k]].bounds);
      centroids.expand(prims_[order_[k]].bounds.center());
    }
    nodes_[node_index].bounds = bounds;
    constexpr std::uint32_t kLeafSize = 2;
    if (count <= kLeafSize || depth >= 28) {
      nodes_[node_index].first = first;
      nodes_[node_index].count = count;
      return;
    }
    int axis = 0;
    const Vec3 ext = centroids.extent();
    if (ext.y() > ext[axis]) axis = 1;
    if (ext.z() > ext[axis]) axis = 2;
    const std::uint32_t mid = first + count / 2;
    std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                     [&](std::uint32_t a, std::uint32_t b) {
                       const double ca = prims_[a].bounds.center()[axis];
                       const double cb = prims_[b].bounds.center()[axis];
                       return ca < cb || (ca == cb && a < b);
                     });
    const auto left = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});
    nodes_.push_back({});
    nodes_[node_index].first = left;
    nodes_[node_index].count = 0;
    build_node(left, first, mid - first, depth + 1);
    build_node(left + 1, mid, first + count - mid, depth + 1);
  }

  std::vector<RayPolygon> prims_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
  Acceleration accel_ = Acceleration::Bvh;
};

}  // namespace radiant
