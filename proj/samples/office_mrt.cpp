// Spot MRT readings in the sample office, plus a globe-thermometer comparison.
//
//   office_mrt [scene.json] [rays]

#include <cstdio>
#include <string>

#include "radiant/mrt.hpp"
#include "radiant/scene_io.hpp"

#ifndef RADIANT_SAMPLE_DIR
#define RADIANT_SAMPLE_DIR "."
#endif

int main(int argc, char** argv) {
  using namespace radiant;
  const std::string path = argc > 1 ? argv[1] : RADIANT_SAMPLE_DIR "/office.json";
  const std::uint64_t rays = argc > 2 ? std::stoull(argv[2]) : 50'000;
  try {
    const Scene scene = read_scene(path);
    const ViewFactorEngine engine(scene);
    struct Spot {
      const char* name;
      Vec3 p;
    };
    const Spot spots[] = {{"desk (room center)", Vec3(2.5, 2.0, 1.1)},
                          {"by the window", Vec3(4.4, 2.0, 1.1)},
                          {"by the radiator", Vec3(2.5, 0.5, 1.1)},
                          {"far corner", Vec3(0.5, 3.5, 1.1)}};
    std::printf("%-20s %10s %10s %10s\n", "spot", "MRT [C]", "subtract", "sum F");
    for (const auto& s : spots) {
      MrtConfig cfg;
      cfg.n_rays = rays;
      const MRTResult native = mrt_at_point(s.p, engine, cfg);
      cfg.mode = MrtMode::Subtract;
      const MRTResult sub = mrt_at_point(s.p, engine, cfg);
      std::printf("%-20s %10.2f %10.2f %10.4f\n", s.name, to_celsius(native.mrt_k), to_celsius(sub.mrt_k),
                  native.view_factor_sum);
    }
    const double globe = globe_mrt({to_kelvin(23.4), to_kelvin(22.1)});
    std::printf("\nglobe 23.4 C, air 22.1 C -> MRT %.2f C\n", to_celsius(globe));
  } catch (const Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
  return 0;
}
