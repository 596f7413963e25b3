#include <gtest/gtest.h>

#include <array>
#include <filesystem>
#include <functional>

#include "radiant/plane_extraction.hpp"
#include "radiant/random.hpp"
#include "radiant/scene.hpp"
#include "radiant/scene_io.hpp"
#include "support/fixtures.hpp"

using namespace radiant;
using radiant::testing::box_surfaces;
using radiant::testing::feature_rect;
using radiant::testing::rectangle;

namespace {

/// 4 x 3 m floor patch at z = 0 with a 2 x 3 m feature over its left half.
Surface half_covered_surface() {
  Surface s = rectangle("wall", Vec3(0, 0, 0), Vec3(4, 0, 0), Vec3(0, 3, 0), 293.0);
  s.features.push_back(feature_rect("panel", "window", Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(0, 3, 0), 320.0));
  return s;
}

ThermalPointCloud grid_cloud(double x0, double x1, double y0, double y1, double step,
                             const std::function<double(double, double)>& temp) {
  ThermalPointCloud cloud;
  for (double x = x0 + step / 2; x < x1; x += step) {
    for (double y = y0 + step / 2; y < y1; y += step) cloud.push_back(Vec3(x, y, 0.0), temp(x, y));
  }
  return cloud;
}

/// Axis-aligned box shell sampled on a regular lattice.
ThermalPointCloud box_shell_cloud(const Vec3& size, double step, double temperature) {
  ThermalPointCloud cloud;
  const int nx = static_cast<int>(std::round(size.x() / step));
  const int ny = static_cast<int>(std::round(size.y() / step));
  const int nz = static_cast<int>(std::round(size.z() / step));
  for (int i = 0; i <= nx; ++i) {
    for (int j = 0; j <= ny; ++j) {
      for (int k = 0; k <= nz; ++k) {
        if (i != 0 && i != nx && j != 0 && j != ny && k != 0 && k != nz) continue;
        cloud.push_back(Vec3(i * step, j * step, k * step), temperature);
      }
    }
  }
  return cloud;
}

}  // namespace

TEST(Scene, RejectsNonCoplanarSurface) {
  Surface s = rectangle("s", Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), 290.0);
  s.corners[2].z() = 0.05;
  EXPECT_THROW(Scene({s}), Error);
}

TEST(Scene, RejectsNonPositiveTemperature) {
  Surface s = rectangle("s", Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), 0.0);
  EXPECT_THROW(Scene({s}), Error);
}

TEST(Scene, RejectsSelfIntersectingPolygon) {
  Surface s = rectangle("s", Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), 290.0);
  std::swap(s.corners[1], s.corners[2]);
  EXPECT_THROW(Scene({s}), Error);
}

TEST(Scene, RejectsDuplicateIdsAcrossSurfacesAndFeatures) {
  Surface a = rectangle("a", Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), 290.0);
  Surface b = rectangle("b", Vec3(0, 0, 1), Vec3(1, 0, 0), Vec3(0, 1, 0), 290.0);
  b.features.push_back(feature_rect("a", "x", Vec3(0.1, 0.1, 1), Vec3(0.2, 0, 0), Vec3(0, 0.2, 0), 300.0));
  EXPECT_THROW(Scene({a, b}), Error);
}

TEST(Scene, RejectsFeatureOutsideParent) {
  Surface s = rectangle("s", Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), 290.0);
  s.features.push_back(feature_rect("f", "x", Vec3(0.8, 0.8, 0), Vec3(0.5, 0, 0), Vec3(0, 0.5, 0), 300.0));
  EXPECT_THROW(Scene({s}), Error);
}

TEST(Scene, RejectsOverlappingFeatures) {
  Surface s = rectangle("s", Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), 290.0);
  s.features.push_back(feature_rect("f1", "x", Vec3(0.1, 0.1, 0), Vec3(0.5, 0, 0), Vec3(0, 0.5, 0), 300.0));
  s.features.push_back(feature_rect("f2", "x", Vec3(0.3, 0.3, 0), Vec3(0.5, 0, 0), Vec3(0, 0.5, 0), 300.0));
  EXPECT_THROW(Scene({s}), Error);
}

TEST(Scene, AcceptsAdjacentFeaturesSharingAnEdge) {
  Surface s = rectangle("s", Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), 290.0);
  s.features.push_back(feature_rect("f1", "x", Vec3(0.1, 0.1, 0), Vec3(0.3, 0, 0), Vec3(0, 0.5, 0), 300.0));
  s.features.push_back(feature_rect("f2", "x", Vec3(0.4, 0.1, 0), Vec3(0.3, 0, 0), Vec3(0, 0.5, 0), 300.0));
  EXPECT_NO_THROW(Scene({s}));
}

TEST(Scene, BoundsEncloseGeometry) {
  const Scene scene(box_surfaces(Vec3(0, 0, 0), Vec3(4, 3, 2.5), 295.0), true);
  EXPECT_TRUE(scene.closed_enclosure());
  EXPECT_NEAR((scene.bounds().max - Vec3(4, 3, 2.5)).norm(), 0.0, 1e-12);
  EXPECT_TRUE(scene.bounds().strictly_contains(Vec3(2, 1.5, 1.1)));
  EXPECT_NEAR(scene.distance_to_geometry(Vec3(2, 1.5, 1.1)), 1.1, 1e-12);
}

TEST(SurfaceTemperature, ConstantField) {
  const Surface s = rectangle("s", Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), 290.0);
  const auto cloud = grid_cloud(0, 1, 0, 1, 0.1, [](double, double) { return 294.15; });
  EXPECT_NEAR(surface_temperature(cloud, s), 294.15, 1e-12);
}

TEST(SurfaceTemperature, TwoPointMean) {
  const Surface s = rectangle("s", Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), 290.0);
  ThermalPointCloud cloud;
  cloud.push_back(Vec3(0.2, 0.2, 0.001), 290.0);
  cloud.push_back(Vec3(0.7, 0.6, -0.002), 300.0);
  cloud.push_back(Vec3(0.5, 0.5, 0.5), 400.0);  // off-plane
  cloud.push_back(Vec3(1.5, 0.5, 0.0), 400.0);  // outside polygon
  EXPECT_DOUBLE_EQ(surface_temperature(cloud, s), 295.0);
}

TEST(SurfaceTemperature, ExcludesFeaturePoints) {
  const Surface s = half_covered_surface();
  const auto cloud = grid_cloud(0, 4, 0, 3, 0.05, [](double x, double) { return x < 2.0 ? 320.0 : 293.0; });
  EXPECT_NEAR(surface_temperature(cloud, s), 293.0, 1e-12);
  EXPECT_NEAR(feature_temperature(cloud, s, s.features[0]), 320.0, 1e-12);
}

TEST(SurfaceTemperature, MissingCoverageNamesSurface) {
  const Surface s = rectangle("lonely", Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), 290.0);
  ThermalPointCloud cloud;
  cloud.push_back(Vec3(5, 5, 5), 300.0);
  try {
    surface_temperature(cloud, s);
    FAIL() << "expected missing-coverage error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingCoverage);
    EXPECT_NE(std::string(e.what()).find("lonely"), std::string::npos);
  }
}

TEST(FeatureTemperature, MeanOfFeaturePoints) {
  Surface s = rectangle("s", Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), 290.0);
  s.features.push_back(feature_rect("f", "lamp", Vec3(0.4, 0.4, 0), Vec3(0.2, 0, 0), Vec3(0, 0.2, 0), 1.0));
  ThermalPointCloud cloud;
  cloud.push_back(Vec3(0.45, 0.45, 0), 318.0);
  cloud.push_back(Vec3(0.5, 0.5, 0), 320.0);
  cloud.push_back(Vec3(0.55, 0.55, 0), 322.0);
  cloud.push_back(Vec3(0.1, 0.1, 0), 290.0);
  EXPECT_DOUBLE_EQ(feature_temperature(cloud, s, s.features[0]), 320.0);

  ThermalPointCloud all_same;
  all_same.push_back(Vec3(0.5, 0.5, 0), 320.0);
  EXPECT_DOUBLE_EQ(feature_temperature(all_same, s, s.features[0]), 320.0);

  ThermalPointCloud outside;
  outside.push_back(Vec3(0.1, 0.1, 0), 290.0);
  EXPECT_THROW(feature_temperature(outside, s, s.features[0]), Error);
}

TEST(SurfaceTemperature, PartitionIsDisjointAndComplete) {
  Surface s = half_covered_surface();
  s.features[0] = feature_rect("a", "x", Vec3(0.5, 0.5, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), 300.0);
  s.features.push_back(feature_rect("b", "y", Vec3(1.5, 0.5, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), 300.0));
  const SurfaceGeometry g = SurfaceGeometry::build(s);
  SequentialRng rng(99);
  std::array<std::size_t, 3> per_region{};
  std::size_t inside = 0;
  for (int i = 0; i < 20000; ++i) {
    const Vec3 p(rng.uniform(-0.5, 4.5), rng.uniform(-0.5, 3.5), rng.uniform(-0.004, 0.004));
    // independent membership from raw coordinates
    const bool in_outline = p.x() >= 0 && p.x() <= 4 && p.y() >= 0 && p.y() <= 3;
    const bool in_a = p.x() >= 0.5 && p.x() <= 1.5 && p.y() >= 0.5 && p.y() <= 1.5;
    const bool in_b = p.x() >= 1.5 && p.x() <= 2.5 && p.y() >= 0.5 && p.y() <= 1.5;
    const auto cls = g.classify(p, kDefaultDistanceThreshold);
    ASSERT_EQ(in_outline, cls.has_value());
    if (!cls) continue;
    ++inside;
    ++per_region[static_cast<std::size_t>(*cls + 1)];
    if (in_a) EXPECT_EQ(*cls, 0);
    else if (in_b) EXPECT_EQ(*cls, 1);
    else EXPECT_EQ(*cls, -1);
  }
  EXPECT_EQ(per_region[0] + per_region[1] + per_region[2], inside);
  EXPECT_GT(per_region[1], 0u);
  EXPECT_GT(per_region[2], 0u);
}

TEST(SceneIo, JsonRoundTrip) {
  auto surfaces = box_surfaces(Vec3(0, 0, 0), Vec3(2, 2, 2), 293.0);
  surfaces[1].features.push_back(
      feature_rect("lamp", "recessed lighting", Vec3(0.5, 0.5, 2), Vec3(1, 0, 0), Vec3(0, 1, 0), 320.0));
  const Scene scene(surfaces, true);
  const Scene back = scene_from_json(scene_to_json(scene));
  ASSERT_EQ(back.size(), scene.size());
  EXPECT_TRUE(back.closed_enclosure());
  EXPECT_EQ(back.surface(1).features.at(0).label, "recessed lighting");
  EXPECT_EQ(back.surface(1).features.at(0).temperature_k, 320.0);
  EXPECT_EQ(back.surface(3).corners[2], scene.surface(3).corners[2]);
}

TEST(SceneIo, MalformedDocumentIsInvalidArgument) {
  try {
    scene_from_json(Json::parse(R"({"surfaces": [{"id": "x"}]})"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
  }
}

// ---------------------------------------------------------------------------
// Plane extraction
// ---------------------------------------------------------------------------

TEST(ExtractPlanes, NoisyPlaneIsRecovered) {
  ThermalPointCloud cloud;
  SequentialRng rng(5);
  for (int i = 0; i < 10000; ++i) {
    cloud.push_back(Vec3(rng.uniform(0, 4), rng.uniform(0, 3), rng.uniform(-0.001, 0.001)), 294.0);
  }
  PlaneExtractionParams params;
  params.distance_threshold = 0.005;
  const auto surfaces = extract_planar_surfaces(cloud, params);
  ASSERT_EQ(surfaces.size(), 1u);
  const SurfaceGeometry g = SurfaceGeometry::build(surfaces[0]);
  const double angle = rad_to_deg(std::acos(std::min(1.0, std::abs(g.frame.normal.dot(Vec3::UnitZ())))));
  EXPECT_LT(angle, 0.5);
  EXPECT_NEAR(area(g.outline), 12.0, 0.02 * 12.0);
  EXPECT_NEAR(surfaces[0].temperature_k, 294.0, 1e-9);
}

TEST(ExtractPlanes, NoiselessPlaneNormalAndOffset) {
  ThermalPointCloud cloud;
  SequentialRng rng(8);
  const Vec3 n = Vec3(0.2, -0.1, 1.0).normalized();
  const PlaneFrame f = PlaneFrame::from_normal(Vec3(0.3, 0.2, 1.7), n);
  for (int i = 0; i < 3000; ++i) cloud.push_back(f.to_3d(Vec2(rng.uniform(-1, 1), rng.uniform(-1, 1))), 300.0);
  const auto surfaces = extract_planar_surfaces(cloud);
  ASSERT_EQ(surfaces.size(), 1u);
  const Plane p = SurfaceGeometry::build(surfaces[0]).plane();
  const double angle = rad_to_deg(std::acos(std::min(1.0, std::abs(p.normal.dot(n)))));
  EXPECT_LT(angle, 1.0);
  EXPECT_LT(std::abs(std::abs(p.offset) - std::abs(n.dot(f.origin))), 0.002);
}

TEST(ExtractPlanes, ClosedBoxYieldsSixSurfaces) {
  const auto cloud = box_shell_cloud(Vec3(4, 3, 2.5), 0.01, 295.0);
  const auto surfaces = extract_planar_surfaces(cloud);
  ASSERT_EQ(surfaces.size(), 6u);
  double total_area = 0.0;
  for (const auto& s : surfaces) total_area += area(SurfaceGeometry::build(s).outline);
  EXPECT_NEAR(total_area, 2 * (4 * 3 + 4 * 2.5 + 3 * 2.5), 0.5);
  EXPECT_NO_THROW(Scene(surfaces));
}

TEST(ExtractPlanes, EmptyCloudGivesNoSurfaces) {
  EXPECT_TRUE(extract_planar_surfaces(ThermalPointCloud{}).empty());
}

TEST(ExtractPlanes, TooFewPointsGivesNoSurfaces) {
  ThermalPointCloud cloud;
  for (int i = 0; i < 10; ++i) cloud.push_back(Vec3(i, i * i, 0), 290.0);
  EXPECT_TRUE(extract_planar_surfaces(cloud).empty());
}

TEST(ExtractPlanes, CollinearCloudIsDegenerate) {
  ThermalPointCloud cloud;
  for (int i = 0; i < 1000; ++i) cloud.push_back(Vec3(i * 0.01, 2 * i * 0.01, 0.5), 290.0);
  try {
    extract_planar_surfaces(cloud);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateGeometry);
  }
}

TEST(ExtractPlanes, DeterministicForFixedSeed) {
  const auto cloud = box_shell_cloud(Vec3(2, 2, 2), 0.02, 295.0);
  const auto a = extract_planar_surfaces(cloud);
  const auto b = extract_planar_surfaces(cloud);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].corners.size(), b[i].corners.size());
    for (std::size_t k = 0; k < a[i].corners.size(); ++k) EXPECT_EQ(a[i].corners[k], b[i].corners[k]);
  }
}
