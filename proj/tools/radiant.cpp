#include <charconv>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "radiant/pipeline.hpp"
#include "radiant/result_io.hpp"

using namespace radiant;

namespace {

Vec3 parse_point(const std::string& text) {
  Vec3 p;
  std::size_t pos = 0;
  for (int a = 0; a < 3; ++a) {
    const std::size_t end = a < 2 ? text.find(',', pos) : text.size();
    if (end == std::string::npos) break;
    const char* first = text.data() + pos;
    const char* last = text.data() + end;
    const auto r = std::from_chars(first, last, p[a]);
    if (r.ec != std::errc() || r.ptr != last) break;
    if (a == 2) return p;
    pos = end + 1;
  }
  throw Error(ErrorKind::InvalidArgument, "point must look like x,y,z, got '" + text + "'");
}

MrtMode parse_mode(const std::string& s) {
  if (s == "native") return MrtMode::Native;
  if (s == "subtract") return MrtMode::Subtract;
  throw Error(ErrorKind::InvalidArgument, "mode must be native or subtract");
}

void warn_all(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

ThermalMap fuse_frames(const std::string& dir, double voxel, bool icp, unsigned threads,
                       std::vector<FrameBundle>* frames_out = nullptr, CameraModel* cams_out = nullptr) {
  const CameraModel cams = read_camera_model(dir);
  std::vector<FrameBundle> frames = load_frames(dir);
  FusionParams fp;
  fp.voxel = voxel;
  fp.icp = icp;
  fp.threads = threads;
  ThermalMap map = build_thermal_map(frames, cams, fp);
  std::cerr << "fused " << frames.size() << " frames into " << map.cloud.size() << " points\n";
  warn_all(map.warnings);
  if (frames_out) *frames_out = std::move(frames);
  if (cams_out) *cams_out = cams;
  return map;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"radiant: mean radiant temperature from thermal RGB-D scans"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", RADIANT_VERSION);
  unsigned threads = 0;
  std::string units = "K";
  app.add_option("--threads", threads, "worker threads (default: RADIANT_THREADS, else all cores)");
  app.add_option("--units", units, "display unit for temperatures: K or C");

  std::string frames_dir, out_path, scene_path, detections_path, cloud_path, point_text, mode_text = "native";
  std::string csv_path, image_path, config_path, tg_text, ta_text;
  double voxel = 0.01, height = kDefaultFieldHeight, threshold = kDefaultDistanceThreshold;
  bool no_icp = false, closed = false;
  std::uint64_t rays = kDefaultRays, seed = kDefaultSeed, plane_seed = 42;
  std::size_t min_inliers = 500, max_planes = 10;
  int nx = 20, ny = 20;

  auto* fuse = app.add_subcommand("fuse", "register and merge a frame dataset into a thermal point cloud");
  fuse->add_option("--frames", frames_dir, "dataset directory")->required();
  fuse->add_option("--out", out_path, "cloud file (.rtpc binary, .txt text)")->required();
  fuse->add_option("--voxel", voxel, "merge voxel size in meters");
  fuse->add_flag("--no-icp", no_icp, "trust the recorded poses");

  auto* extract = app.add_subcommand("extract", "fit planar surfaces to a cloud and write a scene");
  extract->add_option("--cloud", cloud_path)->required();
  extract->add_option("--out", out_path, "scene JSON")->required();
  extract->add_option("--seed", plane_seed, "RANSAC seed");
  extract->add_option("--min-inliers", min_inliers);
  extract->add_option("--max-planes", max_planes);
  extract->add_option("--threshold", threshold, "inlier distance in meters");
  extract->add_flag("--closed", closed, "mark the scene as a closed enclosure");

  auto* seg = app.add_subcommand("segment", "attach detected features to a scene");
  seg->add_option("--frames", frames_dir)->required();
  seg->add_option("--detections", detections_path, "JSONL detections")->required();
  seg->add_option("--scene", scene_path)->required();
  seg->add_option("--out", out_path, "augmented scene JSON")->required();
  seg->add_option("--cloud", cloud_path, "fused cloud; without it the frames are fused here");
  seg->add_option("--voxel", voxel);
  seg->add_flag("--no-icp", no_icp);

  auto* vf = app.add_subcommand("viewfactor", "Monte Carlo view factors from one point");
  vf->add_option("--scene", scene_path)->required();
  vf->add_option("--point", point_text, "x,y,z")->required();
  vf->add_option("--rays", rays);
  vf->add_option("--seed", seed);

  auto* mrt = app.add_subcommand("mrt", "mean radiant temperature at one point");
  mrt->add_option("--scene", scene_path)->required();
  mrt->add_option("--point", point_text, "x,y,z")->required();
  mrt->add_option("--rays", rays);
  mrt->add_option("--seed", seed);
  mrt->add_option("--mode", mode_text, "native or subtract");

  auto* globe = app.add_subcommand("globe", "MRT from a black-globe and air temperature reading");
  globe->add_option("--tg", tg_text, "globe temperature with unit, e.g. 35C or 308.15K")->required();
  globe->add_option("--ta", ta_text, "air temperature with unit")->required();

  auto* field = app.add_subcommand("field", "MRT grid over the floor");
  field->add_option("--scene", scene_path)->required();
  field->add_option("--nx", nx);
  field->add_option("--ny", ny);
  field->add_option("--height", height, "meters above the floor");
  field->add_option("--rays", rays);
  field->add_option("--seed", seed);
  field->add_option("--mode", mode_text);
  field->add_option("--csv", csv_path);
  field->add_option("--image", image_path);

  auto* pipe = app.add_subcommand("pipeline", "fuse, extract, segment and map a dataset");
  std::optional<std::string> p_frames, p_detections, p_scene, p_out, p_mode;
  std::optional<std::uint64_t> p_rays, p_seed;
  std::optional<double> p_voxel, p_height;
  std::optional<int> p_nx, p_ny;
  bool p_no_icp = false;
  pipe->add_option("--config", config_path, "key = value defaults");
  pipe->add_option("--frames", p_frames);
  pipe->add_option("--detections", p_detections);
  pipe->add_option("--scene", p_scene, "declarative scene; skips plane extraction");
  pipe->add_option("--out", p_out, "output directory");
  pipe->add_option("--rays", p_rays);
  pipe->add_option("--seed", p_seed);
  pipe->add_option("--voxel", p_voxel);
  pipe->add_option("--height", p_height);
  pipe->add_option("--nx", p_nx);
  pipe->add_option("--ny", p_ny);
  pipe->add_option("--mode", p_mode);
  pipe->add_flag("--no-icp", p_no_icp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_code::kOk : exit_code::kInvalidInput;
  }

  try {
    const DisplayUnit unit = parse_display_unit(units);
    const unsigned workers = resolve_threads(threads);

    if (fuse->parsed()) {
      const ThermalMap map = fuse_frames(frames_dir, voxel, !no_icp, workers);
      write_cloud(out_path, map.cloud);
    } else if (extract->parsed()) {
      const ThermalPointCloud cloud = read_cloud(cloud_path);
      PlaneExtractionParams pp;
      pp.seed = plane_seed;
      pp.min_inliers = min_inliers;
      pp.max_planes = max_planes;
      pp.distance_threshold = threshold;
      const Scene scene(extract_planar_surfaces(cloud, pp), closed);
      if (scene.empty()) throw Error(ErrorKind::EmptyMap, "no planar surfaces found");
      for (const auto& s : scene.surfaces()) {
        std::cerr << s.id << ": " << s.corners.size() << " corners, " << format_temperature(s.temperature_k, unit) << "\n";
      }
      write_scene(out_path, scene, {{"plane_seed", plane_seed}});
    } else if (seg->parsed()) {
      const Scene scene = read_scene(scene_path);
      const auto detections = read_detections(detections_path);
      std::vector<FrameBundle> frames;
      CameraModel cams;
      ThermalPointCloud cloud;
      std::vector<RigidTransform> poses;
      if (cloud_path.empty()) {
        ThermalMap map = fuse_frames(frames_dir, voxel, !no_icp, workers, &frames, &cams);
        cloud = std::move(map.cloud);
        poses = std::move(map.poses);
      } else {
        cams = read_camera_model(frames_dir);
        frames = load_frames(frames_dir);
        cloud = read_cloud(cloud_path);
        for (const auto& f : frames) poses.push_back(f.pose);
      }
      SegmentationParams sp;
      sp.threads = workers;
      const auto [augmented, result] = segment(scene, cloud, detections, frames, poses, cams, sp);
      for (const auto& n : result.notices) std::cerr << "notice: " << n << "\n";
      for (const auto& s : augmented.surfaces()) {
        for (const auto& f : s.features) {
          std::cerr << f.id << " '" << f.label << "' on " << s.id << ": " << format_temperature(f.temperature_k, unit)
                    << "\n";
        }
      }
      write_scene(out_path, augmented);
    } else if (vf->parsed()) {
      const Scene scene = read_scene(scene_path);
      const ViewFactorSet set = view_factors(parse_point(point_text), scene, rays, seed, workers);
      warn_all(set.warnings);
      std::cout << view_factors_to_json(set).dump(2) << "\n";
    } else if (mrt->parsed()) {
      const Scene scene = read_scene(scene_path);
      MrtConfig mc;
      mc.n_rays = rays;
      mc.seed = seed;
      mc.mode = parse_mode(mode_text);
      mc.threads = workers;
      const MRTResult r = mrt_at_point(parse_point(point_text), scene, mc);
      warn_all(r.warnings);
      std::cout << mrt_result_to_json(r, unit == DisplayUnit::Celsius).dump(2) << "\n";
    } else if (globe->parsed()) {
      const GlobeReading reading{parse_temperature(tg_text), parse_temperature(ta_text)};
      const double t = globe_mrt(reading);
      const Json out{{"globe_k", reading.globe_k}, {"air_k", reading.air_k}, {"mrt_k", t}, {"mrt_c", to_celsius(t)}};
      std::cout << out.dump(2) << "\n";
    } else if (field->parsed()) {
      const Scene scene = read_scene(scene_path);
      FieldConfig fc;
      fc.n_rays = rays;
      fc.seed = seed;
      fc.mode = parse_mode(mode_text);
      fc.threads = workers;
      const MRTField f = compute_field(scene, make_grid(scene, nx, ny, height), fc);
      warn_all(f.warnings);
      if (!csv_path.empty()) write_field_csv(csv_path, f);
      if (!image_path.empty()) write_field_png(image_path, f);
      if (csv_path.empty() && image_path.empty()) std::cout << field_to_csv(f);
      const auto [lo, hi] = f.range();
      std::fprintf(stderr, "%d x %d cells, %zu unmasked, %s .. %s, %.3g rays/s\n", f.nx, f.ny, f.unmasked(),
                   format_temperature(lo, unit).c_str(), format_temperature(hi, unit).c_str(), f.rays_per_second());
    } else if (pipe->parsed()) {
      RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
      if (p_frames) apply_setting(cfg, "frames", *p_frames);
      if (p_detections) apply_setting(cfg, "detections", *p_detections);
      if (p_scene) apply_setting(cfg, "scene", *p_scene);
      if (p_out) apply_setting(cfg, "out", *p_out);
      if (p_mode) apply_setting(cfg, "mode", *p_mode);
      if (p_rays) cfg.rays = *p_rays;
      if (p_seed) cfg.seed = *p_seed;
      if (p_voxel) cfg.voxel = *p_voxel;
      if (p_height) cfg.height = *p_height;
      if (p_nx) cfg.nx = *p_nx;
      if (p_ny) cfg.ny = *p_ny;
      if (p_no_icp) cfg.icp = false;
      if (threads > 0) cfg.threads = threads;
      if (app.count("--units")) cfg.unit = unit;
      const PipelineOutcome outcome = run_pipeline(cfg, [](const std::string& line) { std::cerr << line << "\n"; });
      for (const auto& w : outcome.report["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
      if (outcome.exit_code != exit_code::kOk) {
        std::cerr << "error: " << outcome.message << "\n";
        return outcome.exit_code;
      }
      std::cerr << "artifacts in " << cfg.out.string() << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::kStageFailure;
  }
  return exit_code::kOk;
}
