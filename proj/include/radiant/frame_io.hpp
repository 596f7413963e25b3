#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "radiant/camera.hpp"
#include "radiant/errors.hpp"
#include "radiant/png_io.hpp"
#include "radiant/point_cloud_io.hpp"
#include "radiant/scene_io.hpp"

namespace radiant {

// Frame dataset directory:
//   calib.json            CameraModel
//   NNNNNN.depth.png      16-bit grey, millimeters
//   NNNNNN.thermal.png    16-bit grey, centikelvins
//   NNNNNN.pose.txt       4x4 row-major world <- camera
//   timestamps.txt        optional, one value in seconds per frame; frame index otherwise

namespace detail {

inline PinholeIntrinsics intrinsics_from_json(const Json& j) {
  PinholeIntrinsics k;
  k.fx = j.at("fx").get<double>();
  k.fy = j.at("fy").get<double>();
  k.cx = j.at("cx").get<double>();
  k.cy = j.at("cy").get<double>();
  k.width = j.at("width").get<int>();
  k.height = j.at("height").get<int>();
  return k;
}

inline Json intrinsics_to_json(const PinholeIntrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
}

inline std::string frame_stem(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06zu", index);
  return buf;
}

}  // namespace detail

inline CameraModel camera_model_from_json(const Json& doc) {
  try {
    CameraModel cams;
    cams.depth = detail::intrinsics_from_json(doc.at("depth"));
    cams.thermal = detail::intrinsics_from_json(doc.at("thermal"));
    const Json& ext = doc.at("thermal_from_depth");
    const Json& r = ext.at("rotation");
    const Json& t = ext.at("translation");
    if (r.size() != 3 || t.size() != 3) throw Error(ErrorKind::InvalidArgument, "thermal_from_depth must be 3x3 + 3");
    for (int i = 0; i < 3; ++i) {
      if (r[i].size() != 3) throw Error(ErrorKind::InvalidArgument, "thermal_from_depth rotation must be 3x3");
      for (int k = 0; k < 3; ++k) cams.thermal_from_depth.rotation(i, k) = r[i][k].get<double>();
      cams.thermal_from_depth.translation[i] = t[i].get<double>();
    }
    cams.validate();
    return cams;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("malformed calibration: ") + e.what());
  }
}

inline Json camera_model_to_json(const CameraModel& cams) {
  Json r = Json::array();
  for (int i = 0; i < 3; ++i) {
    r.push_back({cams.thermal_from_depth.rotation(i, 0), cams.thermal_from_depth.rotation(i, 1),
                 cams.thermal_from_depth.rotation(i, 2)});
  }
  const Vec3& t = cams.thermal_from_depth.translation;
  return {{"depth", detail::intrinsics_to_json(cams.depth)},
          {"thermal", detail::intrinsics_to_json(cams.thermal)},
          {"thermal_from_depth", {{"rotation", r}, {"translation", {t.x(), t.y(), t.z()}}}}};
}

inline std::string format_pose(const RigidTransform& pose) {
  const Eigen::Matrix4d m = pose.matrix();
  std::string out;
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < 4; ++k) {
      if (k) out += ' ';
      detail::append_number(out, m(i, k));
    }
    out += '\n';
  }
  return out;
}

inline RigidTransform parse_pose(const std::string& text, const std::string& name) {
  std::istringstream in(text);
  Eigen::Matrix4d m;
  std::string tok;
  for (int i = 0; i < 16; ++i) {
    if (!(in >> tok)) throw Error(ErrorKind::InvalidArgument, "'" + name + "': expected 16 numbers");
    double v = 0.0;
    const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (r.ec != std::errc() || r.ptr != tok.data() + tok.size()) {
      throw Error(ErrorKind::InvalidArgument, "'" + name + "': bad number '" + tok + "'");
    }
    m(i / 4, i % 4) = v;
  }
  if (in >> tok) throw Error(ErrorKind::InvalidArgument, "'" + name + "': trailing data after 16 numbers");
  if (m(3, 0) != 0.0 || m(3, 1) != 0.0 || m(3, 2) != 0.0 || m(3, 3) != 1.0) {
    throw Error(ErrorKind::InvalidArgument, "'" + name + "': last row must be 0 0 0 1");
  }
  RigidTransform pose = RigidTransform::from_matrix(m);
  try {
    pose.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::InvalidArgument, "'" + name + "': " + e.what());
  }
  return pose;
}

inline CameraModel read_camera_model(const std::filesystem::path& dir) {
  const auto path = dir / "calib.json";
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::Io, "missing '" + path.string() + "'");
  return camera_model_from_json(read_json_file(path));
}

/// Sorted frame indices that have a depth image in `dir`.
inline std::vector<std::size_t> list_frames(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorKind::Io, "'" + dir.string() + "' is not a directory");
  static const std::regex pattern(R"((\d{6})\.depth\.png)");
  std::vector<std::size_t> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) out.push_back(std::stoul(m[1].str()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<FrameBundle> load_frames(const std::filesystem::path& dir) {
  const auto indices = list_frames(dir);
  if (indices.empty()) throw Error(ErrorKind::InvalidArgument, "no NNNNNN.depth.png frames in '" + dir.string() + "'");

  std::vector<double> stamps;
  const auto stamp_path = dir / "timestamps.txt";
  if (std::filesystem::exists(stamp_path)) {
    std::istringstream in(detail::slurp(stamp_path));
    double t = 0.0;
    while (in >> t) stamps.push_back(t);
    if (!in.eof()) throw Error(ErrorKind::InvalidArgument, "'" + stamp_path.string() + "': bad timestamp");
    if (stamps.size() != indices.size()) {
      throw Error(ErrorKind::InvalidArgument, "'" + stamp_path.string() + "' has " + std::to_string(stamps.size()) +
                                                  " entries for " + std::to_string(indices.size()) + " frames");
    }
  }

  std::vector<FrameBundle> frames;
  frames.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::string stem = detail::frame_stem(indices[k]);
    FrameBundle f;
    f.timestamp = stamps.empty() ? static_cast<double>(indices[k]) : stamps[k];
    f.depth = read_png16(dir / (stem + ".depth.png"));
    const auto thermal = dir / (stem + ".thermal.png");
    const auto pose = dir / (stem + ".pose.txt");
    if (!std::filesystem::exists(thermal)) throw Error(ErrorKind::Io, "missing '" + thermal.string() + "'");
    if (!std::filesystem::exists(pose)) throw Error(ErrorKind::Io, "missing '" + pose.string() + "'");
    f.thermal = read_png16(thermal);
    f.pose = parse_pose(detail::slurp(pose), pose.string());
    frames.push_back(std::move(f));
  }
  validate_sequence(frames);
  return frames;
}

inline void write_frame(const std::filesystem::path& dir, std::size_t index, const FrameBundle& frame) {
  const std::string stem = detail::frame_stem(index);
  write_png16(dir / (stem + ".depth.png"), frame.depth);
  write_png16(dir / (stem + ".thermal.png"), frame.thermal);
  write_text_file(dir / (stem + ".pose.txt"), format_pose(frame.pose));
}

/// Writes calib.json, every frame, and timestamps.txt.
inline void write_dataset(const std::filesystem::path& dir, const CameraModel& cams, const std::vector<FrameBundle>& frames) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / "calib.json", camera_model_to_json(cams).dump(2) + "\n");
  std::string stamps;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    write_frame(dir, i, frames[i]);
    detail::append_number(stamps, frames[i].timestamp);
    stamps += '\n';
  }
  write_text_file(dir / "timestamps.txt", stamps);
}

}  // namespace radiant
