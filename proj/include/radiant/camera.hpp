#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "radiant/errors.hpp"
#include "radiant/geometry.hpp"
#include "radiant/rigid_transform.hpp"

namespace radiant {

/// Pinhole model with pixel centers at integer coordinates. Rectified images only.
struct PinholeIntrinsics {
  double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;
  int width = 0, height = 0;

  Vec3 back_project(double u, double v, double depth_m) const {
    return {(u - cx) * depth_m / fx, (v - cy) * depth_m / fy, depth_m};
  }

  /// Sub-pixel projection; nullopt behind the camera.
  std::optional<Vec2> project(const Vec3& p) const {
    if (!(p.z() > 0.0)) return std::nullopt;
    return Vec2(fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy);
  }

  bool in_image(long u, long v) const { return u >= 0 && v >= 0 && u < width && v < height; }

  void validate(const char* which) const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw Error(ErrorKind::InvalidArgument, std::string(which) + ": fx, fy must be > 0");
    if (width <= 0 || height <= 0) throw Error(ErrorKind::InvalidArgument, std::string(which) + ": image size must be > 0");
  }
};

/// Depth and thermal intrinsics plus the rigid transform thermal <- depth.
struct CameraModel {
  PinholeIntrinsics depth;
  PinholeIntrinsics thermal;
  RigidTransform thermal_from_depth;

  void validate() const {
    depth.validate("depth intrinsics");
    thermal.validate("thermal intrinsics");
    thermal_from_depth.validate();
  }
};

/// Row-major single-channel image.
template <typename T>
struct Image {
  int width = 0;
  int height = 0;
  std::vector<T> pixels;

  Image() = default;
  Image(int w, int h, T fill = T{}) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  T& at(int u, int v) { return pixels[static_cast<std::size_t>(v) * width + u]; }
  const T& at(int u, int v) const { return pixels[static_cast<std::size_t>(v) * width + u]; }
};

using DepthImage = Image<std::uint16_t>;    // millimeters, 0 = invalid
using ThermalImage = Image<std::uint16_t>;  // centikelvins

inline constexpr double kMillimeter = 1e-3;
inline constexpr double kCentikelvin = 1e-2;

/// One synchronized capture: depth, thermal, and the world <- camera pose.
struct FrameBundle {
  double timestamp = 0.0;
  DepthImage depth;
  ThermalImage thermal;
  RigidTransform pose;
};

inline void validate_sequence(const std::vector<FrameBundle>& frames) {
  for (std::size_t i = 0; i < frames.size(); ++i) {
    frames[i].pose.validate();
    if (i > 0 && !(frames[i].timestamp > frames[i - 1].timestamp)) {
      throw Error(ErrorKind::InvalidArgument, "frame " + std::to_string(i) + ": timestamps must strictly increase");
    }
  }
}

}  // namespace radiant
