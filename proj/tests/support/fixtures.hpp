#pragma once

// Shared scene builders and independent numerical oracles for the test suites.

#include <cmath>
#include <string>
#include <vector>

#include "radiant/scene.hpp"

namespace radiant::testing {

inline Surface rectangle(std::string id, const Vec3& origin, const Vec3& edge_u, const Vec3& edge_v,
                         double temperature_k) {
  Surface s;
  s.id = std::move(id);
  s.corners = {origin, origin + edge_u, origin + edge_u + edge_v, origin + edge_v};
  s.temperature_k = temperature_k;
  return s;
}

inline ThermalFeature feature_rect(std::string id, std::string label, const Vec3& origin, const Vec3& edge_u,
                                   const Vec3& edge_v, double temperature_k) {
  ThermalFeature f;
  f.id = std::move(id);
  f.label = std::move(label);
  f.corners = {origin, origin + edge_u, origin + edge_u + edge_v, origin + edge_v};
  f.temperature_k = temperature_k;
  return f;
}

/// Axis-aligned closed box; ids: floor, ceiling, wall-x0, wall-x1, wall-y0, wall-y1.
inline std::vector<Surface> box_surfaces(const Vec3& lo, const Vec3& hi, double temperature_k) {
  const Vec3 d = hi - lo;
  const Vec3 ex(d.x(), 0, 0), ey(0, d.y(), 0), ez(0, 0, d.z());
  return {
      rectangle("floor", lo, ey, ex, temperature_k),
      rectangle("ceiling", Vec3(lo.x(), lo.y(), hi.z()), ex, ey, temperature_k),
      rectangle("wall-x0", lo, ez, ey, temperature_k),
      rectangle("wall-x1", Vec3(hi.x(), lo.y(), lo.z()), ey, ez, temperature_k),
      rectangle("wall-y0", lo, ex, ez, temperature_k),
      rectangle("wall-y1", Vec3(lo.x(), hi.y(), lo.z()), ez, ex, temperature_k),
  };
}

inline Surface& find_surface(std::vector<Surface>& surfaces, const std::string& id) {
  for (auto& s : surfaces) {
    if (s.id == id) return s;
  }
  throw std::runtime_error("no surface " + id);
}

/// Solid angle of a parallelogram seen from `p`, by midpoint quadrature of
/// c dA / r^3 on an n x n grid. Independent of the closed-form corner formula.
inline double quadrature_solid_angle(const Vec3& p, const Vec3& origin, const Vec3& eu, const Vec3& ev, int n) {
  const Vec3 normal = eu.cross(ev).normalized();
  const double cell = eu.cross(ev).norm() / (static_cast<double>(n) * n);
  double omega = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Vec3 q = origin + ((i + 0.5) / n) * eu + ((j + 0.5) / n) * ev;
      const Vec3 r = q - p;
      const double dist = r.norm();
      omega += std::abs(r.dot(normal)) / (dist * dist * dist) * cell;
    }
  }
  return omega;
}

}  // namespace radiant::testing
