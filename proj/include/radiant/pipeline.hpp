#pragma once

// End-to-end run: fuse -> extract -> segment -> field, with a JSON run report.

#include <png.h>

#include <Eigen/Core>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "radiant/field.hpp"
#include "radiant/frame_io.hpp"
#include "radiant/fusion.hpp"
#include "radiant/plane_extraction.hpp"
#include "radiant/point_cloud_io.hpp"
#include "radiant/scene_io.hpp"
#include "radiant/segmentation.hpp"

#ifndef RADIANT_VERSION
#define RADIANT_VERSION "0.1.0"
#endif

namespace radiant {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kInvalidInput = 2;
inline constexpr int kStageFailure = 3;
inline constexpr int kIo = 4;
}  // namespace exit_code

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return exit_code::kInvalidInput;
    case ErrorKind::Io: return exit_code::kIo;
    default: return exit_code::kStageFailure;
  }
}

enum class DisplayUnit { Kelvin, Celsius };

/// Parses "295.1K", "22C", "22 °C" and the like into kelvins; a unit is required.
inline double parse_temperature(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (c != ' ') s += c;
  }
  auto strip = [&](const std::string& suffix) {
    if (s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
      s.resize(s.size() - suffix.size());
      return true;
    }
    return false;
  };
  bool celsius = false;
  if (strip("\xC2\xB0" "C") || strip("degC") || strip("C") || strip("c")) {
    celsius = true;
  } else if (!(strip("K") || strip("k"))) {
    throw Error(ErrorKind::InvalidArgument, "temperature '" + text + "' needs a unit suffix (K or C)");
  }
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::InvalidArgument, "cannot read temperature '" + text + "'");
  }
  const double k = celsius ? to_kelvin(v) : v;
  if (!(k > 0.0)) throw Error(ErrorKind::InvalidArgument, "temperature '" + text + "' is at or below absolute zero");
  return k;
}

inline DisplayUnit parse_display_unit(const std::string& text) {
  if (text == "K" || text == "k" || text == "kelvin") return DisplayUnit::Kelvin;
  if (text == "C" || text == "c" || text == "celsius" || text == "\xC2\xB0" "C") return DisplayUnit::Celsius;
  throw Error(ErrorKind::InvalidArgument, "unknown display unit '" + text + "' (use K or C)");
}

inline std::string format_temperature(double kelvin, DisplayUnit unit) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(2);
  if (unit == DisplayUnit::Celsius) {
    out << to_celsius(kelvin) << " \xC2\xB0" "C";
  } else {
    out << kelvin << " K";
  }
  return out.str();
}

struct RunConfig {
  std::filesystem::path frames;      // dataset directory; empty with `scene` set skips fusion
  std::filesystem::path detections;  // optional JSONL
  std::filesystem::path scene;       // optional declarative scene
  std::filesystem::path out = "radiant-out";
  std::uint64_t rays = kDefaultRays;
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t plane_seed = 42;
  double voxel = 0.01;
  int nx = 20, ny = 20;
  double height = kDefaultFieldHeight;
  bool icp = true;
  MrtMode mode = MrtMode::Native;
  unsigned threads = 0;  // 0: RADIANT_THREADS, else all cores
  DisplayUnit unit = DisplayUnit::Kelvin;

  void validate() const {
    if (frames.empty() && scene.empty()) throw Error(ErrorKind::InvalidArgument, "need frames or a scene");
    if (!detections.empty() && frames.empty()) throw Error(ErrorKind::InvalidArgument, "detections need frames");
    if (rays == 0) throw Error(ErrorKind::InvalidArgument, "rays must be positive");
    if (!(voxel > 0.0)) throw Error(ErrorKind::InvalidArgument, "voxel must be positive");
    if (nx <= 0 || ny <= 0) throw Error(ErrorKind::InvalidArgument, "grid dimensions must be positive");
    if (!(height > 0.0)) throw Error(ErrorKind::InvalidArgument, "height must be positive");
    if (out.empty()) throw Error(ErrorKind::InvalidArgument, "output directory must be set");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

template <typename T>
T parse_config_number(const std::string& key, const std::string& value) {
  T v{};
  const auto r = std::from_chars(value.data(), value.data() + value.size(), v);
  if (r.ec != std::errc() || r.ptr != value.data() + value.size()) {
    throw Error(ErrorKind::InvalidArgument, "config key '" + key + "' has a bad value '" + value + "'");
  }
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "yes" || value == "on" || value == "1") return true;
  if (value == "false" || value == "no" || value == "off" || value == "0") return false;
  throw Error(ErrorKind::InvalidArgument, "config key '" + key + "' expects true or false");
}

}  // namespace detail

/// Applies one key/value setting. Relative paths resolve against `base`.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value,
                          const std::filesystem::path& base = {}) {
  using detail::parse_config_number;
  auto path = [&] {
    const std::filesystem::path p(value);
    return p.is_absolute() ? p : base / p;
  };
  if (key == "frames") {
    cfg.frames = path();
  } else if (key == "detections") {
    cfg.detections = path();
  } else if (key == "scene") {
    cfg.scene = path();
  } else if (key == "out") {
    cfg.out = path();
  } else if (key == "rays") {
    cfg.rays = parse_config_number<std::uint64_t>(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_config_number<std::uint64_t>(key, value);
  } else if (key == "plane_seed") {
    cfg.plane_seed = parse_config_number<std::uint64_t>(key, value);
  } else if (key == "voxel") {
    cfg.voxel = parse_config_number<double>(key, value);
  } else if (key == "nx") {
    cfg.nx = parse_config_number<int>(key, value);
  } else if (key == "ny") {
    cfg.ny = parse_config_number<int>(key, value);
  } else if (key == "height") {
    cfg.height = parse_config_number<double>(key, value);
  } else if (key == "icp") {
    cfg.icp = detail::parse_bool(key, value);
  } else if (key == "mode") {
    if (value == "native") {
      cfg.mode = MrtMode::Native;
    } else if (value == "subtract") {
      cfg.mode = MrtMode::Subtract;
    } else {
      throw Error(ErrorKind::InvalidArgument, "mode must be native or subtract");
    }
  } else if (key == "threads") {
    cfg.threads = parse_config_number<unsigned>(key, value);
  } else if (key == "units") {
    cfg.unit = parse_display_unit(value);
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown config key '" + key + "'");
  }
}

/// `key = value` lines; '#' starts a comment.
inline void apply_config_text(RunConfig& cfg, const std::string& text, const std::filesystem::path& base = {}) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::InvalidArgument, "config line " + std::to_string(lineno) + ": expected key = value");
    }
    try {
      apply_setting(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)), base);
    } catch (const Error& e) {
      throw Error(e.kind(), "config line " + std::to_string(lineno) + ": " + e.message());
    }
  }
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  RunConfig cfg;
  apply_config_text(cfg, detail::slurp(path), path.parent_path());
  return cfg;
}

struct PipelineOutcome {
  int exit_code = exit_code::kOk;
  std::string stage;  // failing stage; empty on success
  std::string message;
  Json report;
};

namespace detail {

inline Json library_versions() {
  return {{"radiant", RADIANT_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"libpng", PNG_LIBPNG_VER_STRING},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

class Artifacts {
 public:
  explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::filesystem::path partial(const std::string& name) {
    names_.push_back(name);
    return dir_ / (name + ".partial");
  }

  void commit() {
    for (const auto& n : names_) {
      std::error_code ec;
      std::filesystem::rename(dir_ / (n + ".partial"), dir_ / n, ec);
      if (ec) throw Error(ErrorKind::Io, "cannot finalize '" + (dir_ / n).string() + "': " + ec.message());
    }
  }

  Json listing(bool committed) const {
    Json out = Json::array();
    for (const auto& n : names_) out.push_back((dir_ / (committed ? n : n + ".partial")).string());
    return out;
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
};

}  // namespace detail

/// Runs every configured stage. Artifacts are written as `<name>.partial` and
/// renamed once all stages succeed; a failed run leaves them marked partial.
/// report.json is written either way.
inline PipelineOutcome run_pipeline(const RunConfig& cfg,
                                    const std::function<void(const std::string&)>& log = nullptr) {
  PipelineOutcome outcome;
  Json& report = outcome.report;
  report["versions"] = detail::library_versions();
  report["status"] = "running";
  const unsigned threads = resolve_threads(cfg.threads);
  report["config"] = {{"frames", cfg.frames.string()},
                      {"detections", cfg.detections.string()},
                      {"scene", cfg.scene.string()},
                      {"out", cfg.out.string()},
                      {"rays", cfg.rays},
                      {"voxel_m", cfg.voxel},
                      {"nx", cfg.nx},
                      {"ny", cfg.ny},
                      {"height_m", cfg.height},
                      {"icp", cfg.icp},
                      {"mode", cfg.mode == MrtMode::Native ? "native" : "subtract"},
                      {"threads", threads}};
  Json seeds{{"field", cfg.seed}, {"field_cell_seeds", "derive_seed(field, row-major cell index)"}};
  Json timings = Json::object();
  Json counts = Json::object();
  std::vector<std::string> warnings;
  auto note = [&](const std::string& s) {
    if (log) log(s);
  };
  auto run_start = std::chrono::steady_clock::now();
  auto clock = run_start;
  auto lap = [&](const char* stage) {
    const auto now = std::chrono::steady_clock::now();
    timings[stage] = std::chrono::duration<double>(now - clock).count();
    clock = now;
  };

  std::string stage = "config";
  detail::Artifacts artifacts(cfg.out);
  bool out_ready = false;
  try {
    cfg.validate();
    if (!cfg.scene.empty() && !std::filesystem::exists(cfg.scene)) {
      throw Error(ErrorKind::Io, "missing '" + cfg.scene.string() + "'");
    }
    if (!cfg.detections.empty() && !std::filesystem::exists(cfg.detections)) {
      throw Error(ErrorKind::Io, "missing '" + cfg.detections.string() + "'");
    }
    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create '" + cfg.out.string() + "': " + ec.message());
    out_ready = true;

    std::optional<Scene> scene;
    if (!cfg.scene.empty()) {
      stage = "scene";
      scene = read_scene(cfg.scene);
      note("scene: " + std::to_string(scene->size()) + " surfaces from " + cfg.scene.string());
      lap("scene");
    }

    std::vector<FrameBundle> frames;
    CameraModel cams;
    ThermalMap map;
    if (!cfg.frames.empty()) {
      stage = "fuse";
      cams = read_camera_model(cfg.frames);
      frames = load_frames(cfg.frames);
      FusionParams fp;
      fp.voxel = cfg.voxel;
      fp.icp = cfg.icp;
      fp.threads = threads;
      map = build_thermal_map(frames, cams, fp);
      write_cloud(artifacts.partial("cloud.rtpc"), map.cloud);
      for (const auto& w : map.warnings) warnings.push_back("fuse: " + w);
      counts["frames"] = frames.size();
      counts["cloud_points"] = map.cloud.size();
      note("fuse: " + std::to_string(frames.size()) + " frames -> " + std::to_string(map.cloud.size()) + " points");
      lap("fuse");

      if (!scene) {
        stage = "extract";
        PlaneExtractionParams pp;
        pp.seed = cfg.plane_seed;
        seeds["plane_extraction"] = cfg.plane_seed;
        scene = Scene(extract_planar_surfaces(map.cloud, pp), false);
        if (scene->empty()) throw Error(ErrorKind::EmptyMap, "no planar surfaces found");
        note("extract: " + std::to_string(scene->size()) + " surfaces");
        lap("extract");
      }

      if (!cfg.detections.empty()) {
        stage = "segment";
        const auto detections = read_detections(cfg.detections);
        SegmentationParams sp;
        sp.threads = threads;
        auto [augmented, result] = segment(*scene, map.cloud, detections, frames, map.poses, cams, sp);
        scene = std::move(augmented);
        for (const auto& n : result.notices) warnings.push_back("segment: " + n);
        counts["detections"] = detections.size();
        counts["tracks"] = result.tracks.size();
        counts["registered_features"] = result.registered;
        note("segment: " + std::to_string(detections.size()) + " detections -> " +
             std::to_string(result.tracks.size()) + " tracks, " + std::to_string(result.registered) + " registered");
        lap("segment");
      }
    }
    counts["surfaces"] = scene->size();
    counts["features"] = scene->feature_count();
    write_scene(artifacts.partial("scene.json"), *scene,
                {{"generator", "radiant " RADIANT_VERSION}, {"seeds", seeds}});

    stage = "field";
    FieldConfig fc;
    fc.n_rays = cfg.rays;
    fc.seed = cfg.seed;
    fc.mode = cfg.mode;
    fc.threads = threads;
    const FieldGrid grid = make_grid(*scene, cfg.nx, cfg.ny, cfg.height);
    const MRTField field = compute_field(*scene, grid, fc);
    if (cfg.mode == MrtMode::Subtract) seeds["feature"] = cfg.seed;
    for (const auto& w : field.warnings) warnings.push_back("field: " + w);
    write_field_csv(artifacts.partial("field.csv"), field);
    const std::size_t contours = write_field_png(artifacts.partial("field.png"), field);
    const auto [lo, hi] = field.range();
    report["field"] = {{"nx", field.nx},
                       {"ny", field.ny},
                       {"origin", {field.origin.x(), field.origin.y()}},
                       {"spacing", {field.dx, field.dy}},
                       {"height_m", field.height},
                       {"unmasked_cells", field.unmasked()},
                       {"min_k", lo},
                       {"max_k", hi},
                       {"contour_segments", contours},
                       {"rays_traced", field.rays_traced},
                       {"rays_per_second", field.rays_per_second()}};
    note("field: " + std::to_string(field.nx) + "x" + std::to_string(field.ny) + " cells, " +
         format_temperature(lo, cfg.unit) + " .. " + format_temperature(hi, cfg.unit));
    lap("field");

    stage = "finalize";
    artifacts.commit();
    report["status"] = "ok";
  } catch (const Error& e) {
    outcome.exit_code = exit_code_for(e.kind());
    outcome.stage = stage;
    outcome.message = stage + ": " + e.what();
  } catch (const std::exception& e) {
    outcome.exit_code = exit_code::kStageFailure;
    outcome.stage = stage;
    outcome.message = stage + ": " + e.what();
  }
  if (!outcome.stage.empty()) {
    report["status"] = "failed";
    report["failed_stage"] = outcome.stage;
    report["error"] = outcome.message;
  }
  timings["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - run_start).count();
  report["seeds"] = seeds;
  report["timings_s"] = timings;
  report["counts"] = counts;
  report["warnings"] = warnings;
  report["artifacts"] = artifacts.listing(outcome.stage.empty());
  if (out_ready) {
    try {
      write_text_file(cfg.out / "report.json", report.dump(2) + "\n");
    } catch (const Error& e) {
      if (outcome.stage.empty()) {
        outcome.exit_code = exit_code::kIo;
        outcome.stage = "report";
        outcome.message = std::string("report: ") + e.what();
      }
    }
  }
  return outcome;
}

}  // namespace radiant
