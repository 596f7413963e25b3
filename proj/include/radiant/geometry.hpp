#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "radiant/errors.hpp"

namespace radiant {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

using Polygon2 = std::vector<Vec2>;
using Polygon3 = std::vector<Vec3>;

inline constexpr double kPi = std::numbers::pi;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

struct Aabb3 {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void expand(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void expand(const Aabb3& b) {
    min = min.cwiseMin(b.min);
    max = max.cwiseMax(b.max);
  }
  bool empty() const { return (min.array() > max.array()).any(); }
  Vec3 extent() const { return empty() ? Vec3::Zero() : Vec3(max - min); }
  Vec3 center() const { return 0.5 * (min + max); }
  double volume() const {
    const Vec3 e = extent();
    return e.x() * e.y() * e.z();
  }
  bool strictly_contains(const Vec3& p) const {
    return (p.array() > min.array()).all() && (p.array() < max.array()).all();
  }
  Aabb3 padded(double margin) const {
    Aabb3 out = *this;
    out.min.array() -= margin;
    out.max.array() += margin;
    return out;
  }

  /// Slab test against [t_min, t_max]; `inv_dir` is the component-wise reciprocal.
  bool hit(const Vec3& origin, const Vec3& inv_dir, double t_min, double t_max) const {
    for (int axis = 0; axis < 3; ++axis) {
      double t0 = (min[axis] - origin[axis]) * inv_dir[axis];
      double t1 = (max[axis] - origin[axis]) * inv_dir[axis];
      if (t0 > t1) std::swap(t0, t1);
      // NaN from 0 * inf keeps the current interval
      if (t0 > t_min) t_min = t0;
      if (t1 < t_max) t_max = t1;
      if (t_max < t_min) return false;
    }
    return true;
  }
};

inline Aabb3 intersection(const Aabb3& a, const Aabb3& b) {
  Aabb3 out;
  out.min = a.min.cwiseMax(b.min);
  out.max = a.max.cwiseMin(b.max);
  return out;
}

/// Intersection-over-union of two boxes (0 when disjoint or degenerate).
inline double iou(const Aabb3& a, const Aabb3& b) {
  const Aabb3 inter = intersection(a, b);
  if (inter.empty()) return 0.0;
  const double vi = inter.volume();
  const double vu = a.volume() + b.volume() - vi;
  return vu > 0.0 ? vi / vu : 0.0;
}

/// Newell's method; robust for slightly non-planar polygons. Length = 2 * area.
inline Vec3 newell_normal(std::span<const Vec3> pts) {
  Vec3 n = Vec3::Zero();
  const std::size_t count = pts.size();
  for (std::size_t i = 0; i < count; ++i) {
    const Vec3& a = pts[i];
    const Vec3& b = pts[(i + 1) % count];
    n.x() += (a.y() - b.y()) * (a.z() + b.z());
    n.y() += (a.z() - b.z()) * (a.x() + b.x());
    n.z() += (a.x() - b.x()) * (a.y() + b.y());
  }
  return n;
}

struct Plane {
  Vec3 normal = Vec3::UnitZ();  // unit
  double offset = 0.0;          // normal . p = offset

  double signed_distance(const Vec3& p) const { return normal.dot(p) - offset; }
  Vec3 project(const Vec3& p) const { return p - signed_distance(p) * normal; }
};

/// Orthonormal 2D chart on a plane: p = origin + x*u + y*v.
struct PlaneFrame {
  Vec3 origin = Vec3::Zero();
  Vec3 u = Vec3::UnitX();
  Vec3 v = Vec3::UnitY();
  Vec3 normal = Vec3::UnitZ();

  Plane plane() const { return {normal, normal.dot(origin)}; }
  Vec2 to_2d(const Vec3& p) const {
    const Vec3 d = p - origin;
    return {d.dot(u), d.dot(v)};
  }
  Vec3 to_3d(const Vec2& q) const { return origin + q.x() * u + q.y() * v; }

  static PlaneFrame from_normal(const Vec3& origin, const Vec3& normal) {
    PlaneFrame f;
    f.origin = origin;
    f.normal = normal.normalized();
    const Vec3 helper = std::abs(f.normal.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    f.u = (helper - helper.dot(f.normal) * f.normal).normalized();
    f.v = f.normal.cross(f.u);
    return f;
  }

  /// Chart anchored at the first corner, u along the first non-degenerate edge.
  static PlaneFrame from_polygon(std::span<const Vec3> corners) {
    if (corners.size() < 3) {
      throw Error(ErrorKind::DegenerateGeometry, "polygon needs at least 3 corners");
    }
    const Vec3 n = newell_normal(corners);
    if (n.norm() < 1e-12) throw Error(ErrorKind::DegenerateGeometry, "polygon has zero area");
    PlaneFrame f;
    f.normal = n.normalized();
    f.origin = corners[0];
    for (std::size_t i = 1; i < corners.size(); ++i) {
      Vec3 e = corners[i] - corners[0];
      e -= e.dot(f.normal) * f.normal;
      if (e.norm() > 1e-9) {
        f.u = e.normalized();
        f.v = f.normal.cross(f.u);
        return f;
      }
    }
    throw Error(ErrorKind::DegenerateGeometry, "polygon corners coincide");
  }
};

inline Polygon2 project_polygon(const PlaneFrame& frame, std::span<const Vec3> pts) {
  Polygon2 out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(frame.to_2d(p));
  return out;
}

inline Polygon3 lift_polygon(const PlaneFrame& frame, std::span<const Vec2> pts) {
  Polygon3 out;
  out.reserve(pts.size());
  for (const auto& q : pts) out.push_back(frame.to_3d(q));
  return out;
}

// ---------------------------------------------------------------------------
// 2D polygon utilities
// ---------------------------------------------------------------------------

inline double signed_area(std::span<const Vec2> poly) {
  double a = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) a += cross2(poly[i], poly[(i + 1) % n]);
  return 0.5 * a;
}

inline double area(std::span<const Vec2> poly) { return std::abs(signed_area(poly)); }

inline Polygon2 ensure_ccw(Polygon2 poly) {
  if (signed_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
  return poly;
}

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

inline double distance_to_boundary(const Vec2& p, std::span<const Vec2> poly) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    best = std::min(best, point_segment_distance(p, poly[i], poly[(i + 1) % n]));
  }
  return best;
}

/// Even-odd crossing test; points within `tol` of the boundary count as inside.
inline bool point_in_polygon(const Vec2& p, std::span<const Vec2> poly, double tol = 0.0) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) inside = !inside;
    }
  }
  if (inside) return true;
  return distance_to_boundary(p, poly) <= tol;
}

inline bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) { return cross2(b - a, c - a); };
  const double d1 = orient(q1, q2, p1);
  const double d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1);
  const double d4 = orient(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  auto on_segment = [](const Vec2& a, const Vec2& b, const Vec2& c) {
    return std::min(a.x(), b.x()) <= c.x() && c.x() <= std::max(a.x(), b.x()) &&
           std::min(a.y(), b.y()) <= c.y() && c.y() <= std::max(a.y(), b.y());
  };
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

/// No two non-adjacent edges touch.
inline bool is_simple(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a1 = poly[i];
    const Vec2& a2 = poly[(i + 1) % n];
    if ((a2 - a1).norm() == 0.0) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(a1, a2, poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

inline bool is_convex(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  int sign = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = cross2(poly[(i + 1) % n] - poly[i], poly[(i + 2) % n] - poly[(i + 1) % n]);
    if (std::abs(c) < 1e-15) continue;
    const int s = c > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    else if (s != sign) return false;
  }
  return sign != 0;
}

/// Andrew's monotone chain; CCW, no collinear points.
inline Polygon2 convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  Polygon2 hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross2(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross2(hull[k - 1] - hull[k - 2], pts[i - 1] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

/// Minimum-area enclosing rectangle (rotating calipers over hull edges). CCW corners.
inline Polygon2 min_area_rectangle(const std::vector<Vec2>& pts) {
  const Polygon2 hull = convex_hull(pts);
  if (hull.size() < 3) throw Error(ErrorKind::DegenerateGeometry, "points are collinear in the plane");
  double best_area = std::numeric_limits<double>::infinity();
  Polygon2 best;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec2 edge = hull[(i + 1) % hull.size()] - hull[i];
    const double len = edge.norm();
    if (len == 0.0) continue;
    const Vec2 ax = edge / len;
    const Vec2 ay(-ax.y(), ax.x());
    double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
    double min_y = min_x, max_y = -min_x;
    for (const auto& p : hull) {
      const double x = p.dot(ax), y = p.dot(ay);
      min_x = std::min(min_x, x);
      max_x = std::max(max_x, x);
      min_y = std::min(min_y, y);
      max_y = std::max(max_y, y);
    }
    const double a = (max_x - min_x) * (max_y - min_y);
    if (a < best_area) {
      best_area = a;
      best = {min_x * ax + min_y * ay, max_x * ax + min_y * ay, max_x * ax + max_y * ay,
              min_x * ax + max_y * ay};
    }
  }
  return best;
}

/// Sutherland-Hodgman: clips `subject` by the convex CCW polygon `clipper`.
inline Polygon2 clip_polygon(const Polygon2& subject, const Polygon2& clipper) {
  Polygon2 output = subject;
  const std::size_t m = clipper.size();
  for (std::size_t e = 0; e < m && !output.empty(); ++e) {
    const Vec2& a = clipper[e];
    const Vec2& b = clipper[(e + 1) % m];
    const Polygon2 input = std::move(output);
    output.clear();
    auto side = [&](const Vec2& p) { return cross2(b - a, p - a); };
    for (std::size_t i = 0; i < input.size(); ++i) {
      const Vec2& cur = input[i];
      const Vec2& prev = input[(i + input.size() - 1) % input.size()];
      const double sc = side(cur), sp = side(prev);
      if (sc >= 0) {
        if (sp < 0) output.push_back(prev + (cur - prev) * (sp / (sp - sc)));
        output.push_back(cur);
      } else if (sp >= 0) {
        output.push_back(prev + (cur - prev) * (sp / (sp - sc)));
      }
    }
  }
  return output;
}

/// Keeps the part of `poly` on the left of the directed line a->b.
inline Polygon2 clip_half_plane(const Polygon2& poly, const Vec2& a, const Vec2& b) {
  Polygon2 output;
  auto side = [&](const Vec2& p) { return cross2(b - a, p - a); };
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& cur = poly[i];
    const Vec2& prev = poly[(i + poly.size() - 1) % poly.size()];
    const double sc = side(cur), sp = side(prev);
    if (sc >= 0) {
      if (sp < 0) output.push_back(prev + (cur - prev) * (sp / (sp - sc)));
      output.push_back(cur);
    } else if (sp >= 0) {
      output.push_back(prev + (cur - prev) * (sp / (sp - sc)));
    }
  }
  return output;
}

using Triangle2 = std::array<Vec2, 3>;

/// Ear clipping of a simple polygon (either orientation).
inline std::vector<Triangle2> triangulate(const Polygon2& input) {
  Polygon2 poly = ensure_ccw(input);
  std::vector<Triangle2> tris;
  std::vector<std::size_t> idx(poly.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::size_t guard = 0;
  while (idx.size() > 3 && guard < 10 * poly.size() * poly.size()) {
    ++guard;
    bool clipped = false;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const Vec2& a = poly[idx[(k + idx.size() - 1) % idx.size()]];
      const Vec2& b = poly[idx[k]];
      const Vec2& c = poly[idx[(k + 1) % idx.size()]];
      if (cross2(b - a, c - b) <= 0) continue;
      bool ear = true;
      for (std::size_t other : idx) {
        const Vec2& p = poly[other];
        if (&p == &a || &p == &b || &p == &c) continue;
        if (cross2(b - a, p - a) >= 0 && cross2(c - b, p - b) >= 0 && cross2(a - c, p - c) >= 0) {
          ear = false;
          break;
        }
      }
      if (!ear) continue;
      tris.push_back({a, b, c});
      idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(k));
      clipped = true;
      break;
    }
    if (!clipped) break;  // numerically degenerate remainder
  }
  if (idx.size() == 3) tris.push_back({poly[idx[0]], poly[idx[1]], poly[idx[2]]});
  return tris;
}

/// Area of the intersection of two simple polygons.
inline double intersection_area(const Polygon2& a, const Polygon2& b) {
  double total = 0.0;
  const auto ta = triangulate(a);
  const auto tb = triangulate(b);
  for (const auto& x : ta) {
    for (const auto& y : tb) {
      Polygon2 subject(x.begin(), x.end());
      Polygon2 clipper(y.begin(), y.end());
      total += area(clip_polygon(subject, clipper));
    }
  }
  return total;
}

/// Distance from a 3D point to a planar polygon given in chart coordinates.
inline double point_polygon_distance(const Vec3& p, const PlaneFrame& frame, std::span<const Vec2> poly) {
  const Vec2 q = frame.to_2d(p);
  const double h = frame.normal.dot(p - frame.origin);
  const double in_plane = point_in_polygon(q, poly) ? 0.0 : distance_to_boundary(q, poly);
  return std::hypot(h, in_plane);
}

}  // namespace radiant
