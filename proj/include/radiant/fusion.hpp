#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "radiant/camera.hpp"
#include "radiant/errors.hpp"
#include "radiant/icp.hpp"
#include "radiant/parallel.hpp"
#include "radiant/scene.hpp"

namespace radiant {

/// Local thermal cloud in depth-camera coordinates. Each valid depth pixel is
/// back-projected, moved into the thermal camera and given the temperature of
/// the nearest thermal pixel; points outside the thermal view are dropped.
inline ThermalPointCloud register_thermal_to_depth(const FrameBundle& frame, const CameraModel& cams) {
  const auto& di = cams.depth;
  const auto& ti = cams.thermal;
  if (frame.depth.width != di.width || frame.depth.height != di.height) {
    throw Error(ErrorKind::InvalidArgument, "depth image size does not match depth intrinsics");
  }
  if (frame.thermal.width != ti.width || frame.thermal.height != ti.height) {
    throw Error(ErrorKind::InvalidArgument, "thermal image size does not match thermal intrinsics");
  }
  ThermalPointCloud cloud;
  bool any_valid = false;
  for (int v = 0; v < di.height; ++v) {
    for (int u = 0; u < di.width; ++u) {
      const std::uint16_t d = frame.depth.at(u, v);
      if (d == 0) continue;
      any_valid = true;
      const Vec3 p = di.back_project(u, v, d * kMillimeter);
      const auto uv = ti.project(cams.thermal_from_depth * p);
      if (!uv) continue;
      const long tu = std::lround(uv->x());
      const long tv = std::lround(uv->y());
      if (!ti.in_image(tu, tv)) continue;
      const std::uint16_t raw = frame.thermal.at(static_cast<int>(tu), static_cast<int>(tv));
      if (raw == 0) continue;  // no radiometric reading
      cloud.push_back(p, raw * kCentikelvin);
    }
  }
  if (!any_valid) throw Error(ErrorKind::EmptyFrame, "frame has no valid depth pixels");
  return cloud;
}

inline ThermalPointCloud transform_cloud(const ThermalPointCloud& cloud, const RigidTransform& t) {
  ThermalPointCloud out = cloud;
  for (auto& p : out.points) p = t * p;
  return out;
}

/// Voxel-grid accumulator: each occupied voxel keeps its centroid and mean temperature.
/// Output order is first-insertion order, so results are deterministic.
class VoxelMap {
 public:
  explicit VoxelMap(double voxel) : voxel_(voxel) {
    if (!(voxel > 0.0)) throw Error(ErrorKind::InvalidArgument, "voxel size must be > 0");
  }

  void insert(const Vec3& p, double temperature) {
    const Key k{static_cast<std::int64_t>(std::floor(p.x() / voxel_)), static_cast<std::int64_t>(std::floor(p.y() / voxel_)),
                static_cast<std::int64_t>(std::floor(p.z() / voxel_))};
    auto [it, fresh] = index_.try_emplace(k, cells_.size());
    if (fresh) cells_.push_back({});
    Cell& c = cells_[it->second];
    c.sum += p;
    c.temperature += temperature;
    ++c.count;
  }

  void insert(const ThermalPointCloud& cloud) {
    for (std::size_t i = 0; i < cloud.size(); ++i) insert(cloud.points[i], cloud.temperatures[i]);
  }

  std::size_t size() const { return cells_.size(); }

  std::vector<Vec3> centroids() const {
    std::vector<Vec3> out;
    out.reserve(cells_.size());
    for (const auto& c : cells_) out.push_back(c.sum / static_cast<double>(c.count));
    return out;
  }

  ThermalPointCloud cloud() const {
    ThermalPointCloud out;
    out.points.reserve(cells_.size());
    out.temperatures.reserve(cells_.size());
    for (const auto& c : cells_) {
      out.push_back(c.sum / static_cast<double>(c.count), c.temperature / static_cast<double>(c.count));
    }
    return out;
  }

 private:
  struct Key {
    std::int64_t x, y, z;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ull;
      h ^= static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
      h ^= static_cast<std::uint64_t>(k.z) * 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
      return static_cast<std::size_t>(h);
    }
  };
  struct Cell {
    Vec3 sum = Vec3::Zero();
    double temperature = 0.0;
    std::size_t count = 0;
  };

  double voxel_;
  std::unordered_map<Key, std::size_t, KeyHash> index_;
  std::vector<Cell> cells_;
};

inline ThermalPointCloud voxel_merge(const ThermalPointCloud& cloud, double voxel) {
  VoxelMap map(voxel);
  map.insert(cloud);
  return map.cloud();
}

inline IcpParams default_fusion_icp() {
  IcpParams p;
  p.median_factor = 3.0;
  return p;
}

struct FusionParams {
  double voxel = 0.01;  // m
  bool icp = true;
  IcpParams icp_params = default_fusion_icp();
  std::size_t icp_max_source_points = 4000;  // frame points used for alignment (strided subsample)
  unsigned threads = 1;
};

struct ThermalMap {
  ThermalPointCloud cloud;                  // world coordinates, voxel-merged
  std::vector<RigidTransform> poses;        // per frame, after ICP refinement
  std::vector<double> icp_rms;              // per frame; 0 when not aligned
  std::vector<std::string> warnings;
};

/// Registers every frame, moves it into the world with its pose, optionally
/// refines that pose by ICP against the map accumulated so far, and merges.
inline ThermalMap build_thermal_map(const std::vector<FrameBundle>& frames, const CameraModel& cams,
                                    const FusionParams& params = {}) {
  if (frames.empty()) throw Error(ErrorKind::EmptyMap, "no frames supplied");
  cams.validate();
  validate_sequence(frames);

  std::vector<ThermalPointCloud> local(frames.size());
  std::vector<std::string> frame_errors(frames.size());
  parallel_for(frames.size(), params.threads, [&](std::size_t i) {
    try {
      local[i] = register_thermal_to_depth(frames[i], cams);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::EmptyFrame) throw Error(e.kind(), "frame " + std::to_string(i) + ": " + e.message());
      frame_errors[i] = e.what();
    }
  });

  ThermalMap out;
  VoxelMap map(params.voxel);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    RigidTransform pose = frames[i].pose;
    double rms = 0.0;
    if (!frame_errors[i].empty() || local[i].empty()) {
      out.warnings.push_back("frame " + std::to_string(i) + ": " +
                             (frame_errors[i].empty() ? std::string("no thermal coverage") : frame_errors[i]));
      out.poses.push_back(pose);
      out.icp_rms.push_back(0.0);
      continue;
    }
    if (params.icp && map.size() >= 3) {
      const std::size_t n = local[i].size();
      const std::size_t stride = params.icp_max_source_points > 0 ? std::max<std::size_t>(1, n / params.icp_max_source_points) : 1;
      std::vector<Vec3> source;
      source.reserve(n / stride + 1);
      for (std::size_t k = 0; k < n; k += stride) source.push_back(pose * local[i].points[k]);
      try {
        const KdTree target(map.centroids());
        const IcpResult r = icp_align(source, target, params.icp_params);
        pose = r.transform * pose;
        rms = r.rms_error;
      } catch (const Error& e) {
        out.warnings.push_back("frame " + std::to_string(i) + ": ICP skipped (" + e.what() + ")");
      }
    }
    for (std::size_t k = 0; k < local[i].size(); ++k) map.insert(pose * local[i].points[k], local[i].temperatures[k]);
    out.poses.push_back(pose);
    out.icp_rms.push_back(rms);
  }
  if (map.size() == 0) throw Error(ErrorKind::EmptyMap, "no frame produced any thermal points");
  out.cloud = map.cloud();
  return out;
}

}  // namespace radiant
