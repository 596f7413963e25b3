// Acceptance run: one PASS/FAIL line per criterion.
//
//   radiant_acceptance [suite executables...]
//
// Suite executables are run for criterion 9; ctest passes every GoogleTest binary.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "radiant/icp.hpp"
#include "radiant/pipeline.hpp"
#include "support/synthetic_room.hpp"

using namespace radiant;
using radiant::testing::box_surfaces;
using radiant::testing::feature_rect;
using radiant::testing::find_surface;
using radiant::testing::rectangle;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int n, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", n, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double direct_eq1(const std::vector<std::pair<double, double>>& ft) {
  double num = 0.0, den = 0.0;
  for (auto [f, t] : ft) {
    num += f * std::pow(t, 4);
    den += f;
  }
  return std::pow(num / den, 0.25);
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("radiant-acceptance-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  constexpr std::uint64_t n = 100'000;
  SequentialRng rng(2024);
  double worst = 0.0;  // in units of the allowed band
  for (int i = 0; i < 20; ++i) {
    const Vec3 o(rng.uniform(-1, 0), rng.uniform(-1, 0), 0);
    const Surface rect = rectangle("r", o, Vec3(rng.uniform(0.5, 2), 0, 0), Vec3(0, rng.uniform(0.5, 2), 0), 300.0);
    const Vec3 p(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.3, 2));
    const double exact = analytic_rectangle_view_factor(p, rect);
    const double band = 4.0 * std::sqrt(exact * (1.0 - exact) / n);
    const double mc = view_factors(p, Scene({rect}), n, 1000 + i).at("r");
    worst = std::max(worst, std::abs(mc - exact) / band);
  }
  const Scene cube(box_surfaces(Vec3(0, 0, 0), Vec3(2, 2, 2), 295.0), true);
  const auto vfs = view_factors(Vec3(1, 1, 1), cube, n, 42);
  double face_dev = 0.0, sum = 0.0;
  for (const auto& [id, f] : vfs.entries) {
    face_dev = std::max(face_dev, std::abs(f - 1.0 / 6.0));
    sum += f;
  }
  const double secs = seconds_since(t0);
  report(1, worst <= 1.0 && face_dev <= 0.005 && sum == 1.0 && secs < 5.0,
         fmt("20 rect cases worst |MC-exact| = %.2f of 4 sigma; cube max |F-1/6| = %.4f; sum F = %.17g; %.2f s", worst,
             face_dev, sum, secs));
}

void criterion2() {
  ViewFactorSet uniform;
  uniform.n_rays = 1;
  std::map<std::string, double> temps;
  for (const char* id : {"a", "b", "c", "d", "e", "f"}) {
    uniform.entries[id] = 1.0 / 6.0;
    temps[id] = 295.0;
  }
  const double u = mrt_from_view_factors(uniform, temps).mrt_k;

  ViewFactorSet two;
  two.n_rays = 1;
  two.entries = {{"cold", 0.5}, {"warm", 0.5}};
  const double t2 = mrt_from_view_factors(two, {{"cold", 290.0}, {"warm", 300.0}}).mrt_k;
  const double oracle2 = direct_eq1({{0.5, 290.0}, {0.5, 300.0}});

  SequentialRng rng(8);
  double scale_dev = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    ViewFactorSet a, b;
    a.n_rays = b.n_rays = 1;
    std::map<std::string, double> tt;
    const double k = rng.uniform(0.05, 3.0);
    for (int i = 0; i < 5; ++i) {
      const std::string id = "r" + std::to_string(i);
      a.entries[id] = rng.uniform(0.01, 0.3);
      b.entries[id] = k * a.entries[id];
      tt[id] = rng.uniform(280.0, 320.0);
    }
    CoveragePolicy quiet;
    quiet.threshold = 0.0;
    const double ra = mrt_from_view_factors(a, tt, quiet).mrt_k;
    const double rb = mrt_from_view_factors(b, tt, quiet).mrt_k;
    scale_dev = std::max(scale_dev, std::abs(ra - rb) / ra);
  }
  report(2, std::abs(u - 295.0) <= 1e-9 && std::abs(t2 - 295.13) <= 0.005 && std::abs(t2 - oracle2) <= 1e-9 &&
                scale_dev <= 1e-12,
         fmt("uniform -> %.12f K; two-region -> %.4f K (oracle %.4f); scaling max rel dev %.1e", u, t2, oracle2,
             scale_dev));
}

void criterion3() {
  // native tally vs explicit subtraction
  auto surfaces = box_surfaces(Vec3(0, 0, 0), Vec3(4, 3, 2.5), 293.0);
  find_surface(surfaces, "wall-x1")
      .features.push_back(feature_rect("window", "window", Vec3(4, 1, 0.8), Vec3(0, 1, 0), Vec3(0, 0, 1), 280.0));
  find_surface(surfaces, "ceiling")
      .features.push_back(
          feature_rect("lamp", "recessed lighting", Vec3(1.5, 1, 2.5), Vec3(0.6, 0, 0), Vec3(0, 0.6, 0), 330.0));
  const Scene scene(surfaces, true);
  const ViewFactorEngine engine(scene);
  const Vec3 p(3.2, 1.4, 1.1);
  MrtConfig native;
  native.n_rays = 100'000;
  std::vector<double> samples;
  for (std::uint64_t s = 0; s < 12; ++s) {
    native.seed = 500 + s;
    samples.push_back(mrt_at_point(p, engine, native).mrt_k);
  }
  double mean = 0.0, var = 0.0;
  for (double v : samples) mean += v / samples.size();
  for (double v : samples) var += (v - mean) * (v - mean) / (samples.size() - 1);
  const double sigma = std::sqrt(var);
  native.seed = kDefaultSeed;
  MrtConfig subtract = native;
  subtract.mode = MrtMode::Subtract;
  const double a = mrt_at_point(p, engine, native).mrt_k;
  const double b = mrt_at_point(p, engine, subtract).mrt_k;
  subtract.feature_seed = 777;
  const double c = mrt_at_point(p, engine, subtract).mrt_k;
  const bool tally_ok = std::abs(a - b) <= 3 * sigma && std::abs(a - c) <= 3 * sigma * std::sqrt(2.0);

  // analytic view factors through both paths
  const Scene box(box_surfaces(Vec3(0, 0, 0), Vec3(4, 3, 2.5), 293.0), true);
  const Vec3 q(1.3, 1.1, 1.2);
  const Surface window = rectangle("window", Vec3(4, 1, 0.8), Vec3(0, 1, 0), Vec3(0, 0, 1), 280.0);
  const double f_window = analytic_rectangle_view_factor(q, window);
  ViewFactorSet vfs;
  vfs.n_rays = 1;
  std::vector<EnvelopeInput> envs;
  std::map<std::string, double> temps{{"window", 280.0}};
  double t = 290.0;
  for (const auto& s : box.surfaces()) {
    const double f = analytic_rectangle_view_factor(q, s);
    t += 1.5;
    temps[s.id] = t;
    EnvelopeInput env{s.id, f, t, {}};
    if (s.id == "wall-x1") {
      env.features.push_back({"window", f_window, 280.0});
      vfs.entries[s.id] = f - f_window;
      vfs.entries["window"] = f_window;
    } else {
      vfs.entries[s.id] = f;
    }
    envs.push_back(env);
  }
  const double via_tally = mrt_from_view_factors(vfs, temps).mrt_k;
  const double via_subtract = mrt_from_envelopes(envs).mrt_k;
  const bool exact_ok = std::abs(via_tally - via_subtract) <= 1e-12 * via_tally;

  // hot ceiling
  auto hot = box_surfaces(Vec3(0, 0, 0), Vec3(2, 2, 2), 293.0);
  find_surface(hot, "ceiling").temperature_k = 320.0;
  MrtConfig big;
  big.n_rays = 1'000'000;
  big.threads = resolve_threads();
  const double hot_mc = mrt_at_point(Vec3(1, 1, 1), Scene(hot, true), big).mrt_k;
  const double hot_oracle = direct_eq1({{5.0 / 6.0, 293.0}, {1.0 / 6.0, 320.0}});
  const bool hot_ok = std::abs(hot_mc - hot_oracle) <= 0.1;

  report(3, tally_ok && exact_ok && hot_ok,
         fmt("native-subtract %.2e K (3 sigma = %.3f K), mismatched feature seed %.3f K; analytic paths differ by %.1e "
             "K; hot ceiling %.3f K vs oracle %.3f K (the stated 297.81 K does not match its own formula)",
             std::abs(a - b), 3 * sigma, std::abs(a - c), std::abs(via_tally - via_subtract), hot_mc, hot_oracle));
}

void criterion4() {
  const double same = globe_mrt({295.15, 295.15});
  const double up = globe_mrt({295.15, 294.15});
  const double down = globe_mrt({294.15, 295.15});
  SequentialRng rng(12);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double tg = rng.uniform(280.0, 320.0), ta = rng.uniform(280.0, 320.0);
    const double m = globe_mrt({tg, ta});
    const double d = tg - ta;
    const double tg4 = std::pow(m, 4) - 0.4e8 * d * std::pow(std::abs(d), 0.25);
    worst = std::max(worst, std::abs(tg4 / std::pow(tg, 4) - 1.0));
  }
  report(4, std::abs(same - 295.15) <= 1e-9 && std::abs(up - 295.54) <= 0.005 && std::abs(down - 293.75) <= 0.01 &&
                worst <= 1e-6,
         fmt("identity %.9f K; +1 K -> %.4f K; -1 K -> %.4f K; inverse max rel err %.1e", same, up, down, worst));
}

void criterion5() {
  double worst_angle = 0.0, worst_dist = 0.0;
  int worst_iter = 0;
  for (std::uint64_t c = 0; c < 10; ++c) {
    SequentialRng rng(300 + c);
    std::vector<Vec3> src;
    for (int i = 0; i < 1000; ++i) src.emplace_back(rng.uniform(-1, 1), rng.uniform(-0.8, 0.8), rng.uniform(-0.5, 0.5));
    const Vec3 axis = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)).normalized();
    const Vec3 dir = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)).normalized();
    const auto truth =
        RigidTransform::from_axis_angle(axis, deg_to_rad(rng.uniform(0.0, 5.0)), dir * rng.uniform(0.0, 0.05));
    std::vector<Vec3> dst;
    for (const auto& p : src) dst.push_back(truth * p);
    const auto r = icp_align(src, dst);
    const auto [angle, dist] = transform_error(r.transform, truth);
    worst_angle = std::max(worst_angle, angle);
    worst_dist = std::max(worst_dist, dist);
    worst_iter = std::max(worst_iter, r.iterations);
  }
  report(5, worst_angle <= 0.05 && worst_dist <= 1e-4 && worst_iter <= 50,
         fmt("10 clouds: worst %.2e deg, %.2e m, %d iterations", worst_angle, worst_dist, worst_iter));
}

struct EndToEnd {
  fs::path dataset;
  RunConfig config;
  PipelineOutcome first;
};

EndToEnd criterion6() {
  EndToEnd e;
  e.dataset = scratch("dataset");
  const auto ds = radiant::testing::make_dataset();
  radiant::testing::write_dataset(e.dataset, ds);
  e.config.frames = e.dataset;
  e.config.detections = e.dataset / "detections.jsonl";
  e.config.out = scratch("run-a");
  e.config.rays = 20'000;
  e.config.threads = 1;
  e.first = run_pipeline(e.config);
  if (e.first.exit_code != 0) {
    report(6, false, "pipeline failed: " + e.first.message);
    return e;
  }
  const MRTField recon = read_field_csv(e.config.out / "field.csv");
  const Scene truth = radiant::testing::declarative_scene(ds.room);
  FieldConfig fc;
  fc.n_rays = e.config.rays;
  fc.seed = e.config.seed;
  const MRTField direct = compute_field(truth, make_grid(truth, e.config.nx, e.config.ny, e.config.height), fc);
  double worst = 0.0;
  std::size_t compared = 0, masked_in_one = 0;
  for (std::size_t k = 0; k < direct.values.size(); ++k) {
    if (direct.masked[k] != recon.masked[k]) ++masked_in_one;
    if (direct.masked[k] || recon.masked[k]) continue;
    ++compared;
    worst = std::max(worst, std::abs(direct.values[k] - recon.values[k]));
  }
  const auto& counts = e.first.report["counts"];
  report(6, worst <= 0.2 && compared > 0 && counts["surfaces"] == 6 && counts["features"] == 1,
         fmt("%zu cells compared (%zu masked in only one), worst |recon - direct| = %.4f K (limit 0.2 K); %d surfaces, "
             "%d feature",
             compared, masked_in_one, worst, counts["surfaces"].get<int>(), counts["features"].get<int>()));
  return e;
}

void criterion7(const EndToEnd& e) {
  if (e.first.exit_code != 0) {
    report(7, false, "criterion 6 run failed");
    return;
  }
  RunConfig again = e.config;
  again.out = scratch("run-b");
  RunConfig threaded = e.config;
  threaded.out = scratch("run-c");
  threaded.threads = 4;
  const auto b = run_pipeline(again);
  const auto c = run_pipeline(threaded);
  const bool csv_same = detail::slurp(e.config.out / "field.csv") == detail::slurp(again.out / "field.csv");
  bool all_same = b.exit_code == 0 && c.exit_code == 0;
  std::string differing;
  for (const char* name : {"field.csv", "field.png", "scene.json", "cloud.rtpc"}) {
    if (detail::slurp(e.config.out / name) != detail::slurp(threaded.out / name)) {
      all_same = false;
      differing += std::string(" ") + name;
    }
  }
  report(7, csv_same && all_same,
         fmt("repeat run CSV %s; 1 vs 4 threads: %s", csv_same ? "byte-identical" : "DIFFERS",
             all_same ? "csv, png, scene, cloud byte-identical" : ("differ:" + differing).c_str()));
}

void criterion8() {
  auto surfaces = box_surfaces(Vec3(0, 0, 0), Vec3(5, 4, 2.8), 294.0);
  find_surface(surfaces, "wall-x1")
      .features.push_back(feature_rect("window-a", "window", Vec3(5, 0.5, 0.9), Vec3(0, 1.2, 0), Vec3(0, 0, 1.4), 283.0));
  find_surface(surfaces, "wall-x1")
      .features.push_back(feature_rect("window-b", "window", Vec3(5, 2.3, 0.9), Vec3(0, 1.2, 0), Vec3(0, 0, 1.4), 283.0));
  find_surface(surfaces, "wall-y0")
      .features.push_back(feature_rect("radiator", "radiator", Vec3(1.5, 0, 0.15), Vec3(2, 0, 0), Vec3(0, 0, 0.6), 318.0));
  find_surface(surfaces, "ceiling")
      .features.push_back(feature_rect("lamp", "recessed lighting", Vec3(2, 1.7, 2.8), Vec3(0.6, 0, 0), Vec3(0, 0.6, 0), 330.0));
  const fs::path dir = scratch("perf");
  write_scene(dir / "scene.json", Scene(surfaces, true));
  RunConfig cfg;
  cfg.scene = dir / "scene.json";
  cfg.out = dir / "out";
  cfg.rays = 100'000;
  const auto outcome = run_pipeline(cfg);
  if (outcome.exit_code != 0) {
    report(8, false, "run failed: " + outcome.message);
    return;
  }
  const double secs = outcome.report["timings_s"]["field"].get<double>();
  const double rps = outcome.report["field"]["rays_per_second"].get<double>();
  report(8, secs < 60.0,
         fmt("20x20 field, 100000 rays/point, 10 polygons: %.1f s on %u threads, %.3g rays/s (from the run report)", secs,
             resolve_threads(), rps));
}

void criterion9(int argc, char** argv) {
  if (argc < 2) {
    report(9, false, "no suite executables given");
    return;
  }
  int passed = 0;
  std::string failed;
  for (int i = 1; i < argc; ++i) {
    const std::string cmd = "\"" + std::string(argv[i]) + "\" --gtest_brief=1 > /dev/null 2>&1";
    if (std::system(cmd.c_str()) == 0) {
      ++passed;
    } else {
      failed += " " + fs::path(argv[i]).filename().string();
    }
  }
  report(9, passed == argc - 1,
         fmt("%d of %d suites pass headless with no external data%s", passed, argc - 1,
             failed.empty() ? "" : ("; failed:" + failed).c_str()));
}

}  // namespace

int main(int argc, char** argv) {
  try {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    const EndToEnd e = criterion6();
    criterion7(e);
    criterion8();
    criterion9(argc, argv);
  } catch (const std::exception& ex) {
    std::printf("aborted: %s\n", ex.what());
    return 1;
  }
  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
