#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "radiant/errors.hpp"
#include "radiant/scene.hpp"
#include "radiant/viewfactor.hpp"

namespace radiant {

inline constexpr double kZeroCelsius = 273.15;
inline constexpr double kGlobeConvectionCoefficient = 0.4e8;
inline constexpr double kCoverageWarningThreshold = 0.99;

inline double to_celsius(double kelvin) { return kelvin - kZeroCelsius; }
inline double to_kelvin(double celsius) { return celsius + kZeroCelsius; }

struct RegionContribution {
  std::string id;
  double view_factor = 0.0;
  double temperature_k = 0.0;
  double share = 0.0;  // F T^4 / sum(F T^4)
};

struct MRTResult {
  double mrt_k = 0.0;
  double view_factor_sum = 0.0;
  std::vector<RegionContribution> contributions;
  std::uint64_t n_rays = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

struct CoveragePolicy {
  bool normalize = true;  // false: sum(F) < threshold is an error
  double threshold = kCoverageWarningThreshold;
};

/// Radiant-weighted mean: (sum F_i T_i^4 / sum F_i)^(1/4).
inline MRTResult mrt_from_view_factors(const ViewFactorSet& vfs, const std::map<std::string, double>& temps,
                                       const CoveragePolicy& policy = {}) {
  MRTResult out;
  out.n_rays = vfs.n_rays;
  out.seed = vfs.seed;
  out.warnings = vfs.warnings;
  double weight = 0.0, radiant = 0.0;
  for (const auto& [id, f] : vfs.entries) {
    if (!(f >= 0.0) || !std::isfinite(f)) {
      throw Error(ErrorKind::InvalidArgument, "view factor of '" + id + "' must be finite and >= 0");
    }
    if (f == 0.0) continue;
    const auto it = temps.find(id);
    if (it == temps.end()) {
      throw Error(ErrorKind::IncompleteScene, "region '" + id + "' has a view factor but no temperature");
    }
    const double t = it->second;
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw Error(ErrorKind::InvalidArgument, "temperature of '" + id + "' must be finite and > 0 K");
    }
    const double t4 = (t * t) * (t * t);
    weight += f;
    radiant += f * t4;
    out.contributions.push_back({id, f, t, f * t4});
  }
  if (!(weight > 0.0)) throw Error(ErrorKind::DegenerateGeometry, "view factors sum to zero");
  for (auto& c : out.contributions) c.share /= radiant;
  out.view_factor_sum = weight;
  if (weight < policy.threshold) {
    if (!policy.normalize) {
      throw Error(ErrorKind::IncompleteScene, "view factors sum to " + std::to_string(weight) + " (open scene)");
    }
    out.warnings.push_back("view factors sum to " + std::to_string(weight) + "; result normalized");
  }
  out.mrt_k = std::pow(radiant / weight, 0.25);
  return out;
}

/// Temperature of every surface envelope and feature in the scene, keyed by id.
inline std::map<std::string, double> scene_temperatures(const Scene& scene) {
  std::map<std::string, double> temps;
  for (const auto& s : scene.surfaces()) {
    temps[s.id] = s.temperature_k;
    for (const auto& f : s.features) temps[f.id] = f.temperature_k;
  }
  return temps;
}

// ---------------------------------------------------------------------------
// Envelope correction: per-envelope view factors, feature view factors subtracted
// from their envelope, then the weighted fourth-power mean.
// ---------------------------------------------------------------------------

struct FeatureInput {
  std::string id;
  double view_factor = 0.0;
  double temperature_k = 0.0;
};

struct EnvelopeInput {
  std::string id;
  double initial_view_factor = 0.0;  // before feature correction
  double temperature_k = 0.0;        // envelope temperature with features excluded
  std::vector<FeatureInput> features;
};

/// Applies the envelope correction F_i -= F_ij feature by feature, then the fourth-power mean.
inline MRTResult mrt_from_envelopes(const std::vector<EnvelopeInput>& envelopes, std::uint64_t n_rays = 0,
                                    std::uint64_t seed = 0, const CoveragePolicy& policy = {}) {
  ViewFactorSet vfs;
  vfs.n_rays = n_rays;
  vfs.seed = seed;
  std::map<std::string, double> temps;
  for (const auto& env : envelopes) {
    double f = env.initial_view_factor;
    for (const auto& feat : env.features) {
      f = f - feat.view_factor;
      vfs.entries[feat.id] = feat.view_factor;
      temps[feat.id] = feat.temperature_k;
    }
    if (f < 0.0) {
      // exact zero is allowed; rounding below zero from identical tallies is clamped
      if (f < -1e-12) {
        throw Error(ErrorKind::InconsistentGeometry,
                    "feature view factors exceed the view factor of envelope '" + env.id + "'");
      }
      f = 0.0;
    }
    vfs.entries[env.id] = f;
    temps[env.id] = env.temperature_k;
  }
  return mrt_from_view_factors(vfs, temps, policy);
}

enum class MrtMode { Native, Subtract };

struct MrtConfig {
  std::uint64_t n_rays = kDefaultRays;
  std::uint64_t seed = kDefaultSeed;
  MrtMode mode = MrtMode::Native;
  std::optional<std::uint64_t> feature_seed;  // subtract mode only; defaults to `seed`
  unsigned threads = 1;
  CoveragePolicy coverage;
};

/// MRT at one observation point using a prebuilt engine.
inline MRTResult mrt_at_point(const Vec3& point, const ViewFactorEngine& engine, const MrtConfig& cfg = {}) {
  const Scene& scene = engine.scene();
  if (cfg.mode == MrtMode::Native) {
    const ViewFactorSet vfs = engine.view_factors(point, {cfg.n_rays, cfg.seed, cfg.threads});
    return mrt_from_view_factors(vfs, scene_temperatures(scene), cfg.coverage);
  }

  if (cfg.n_rays == 0) throw Error(ErrorKind::InvalidArgument, "n_rays must be at least 1");
  engine.check_observation_point(point);
  const auto envelope_counts =
      engine.tally(point, cfg.n_rays, cfg.seed, ViewFactorEngine::Tally::EnvelopeOnly, cfg.threads);
  const auto feature_counts = engine.tally(point, cfg.n_rays, cfg.feature_seed.value_or(cfg.seed),
                                           ViewFactorEngine::Tally::FeatureOnly, cfg.threads);
  const double n = static_cast<double>(cfg.n_rays);
  std::vector<EnvelopeInput> envelopes;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const Surface& s = scene.surface(i);
    EnvelopeInput env{s.id, static_cast<double>(envelope_counts[engine.region_index({static_cast<int>(i), -1})]) / n,
                      s.temperature_k, {}};
    for (std::size_t j = 0; j < s.features.size(); ++j) {
      const auto c = feature_counts[engine.region_index({static_cast<int>(i), static_cast<int>(j)})];
      env.features.push_back({s.features[j].id, static_cast<double>(c) / n, s.features[j].temperature_k});
    }
    envelopes.push_back(std::move(env));
  }
  MRTResult out = mrt_from_envelopes(envelopes, cfg.n_rays, cfg.seed, cfg.coverage);
  if (cfg.n_rays < kMinRecommendedRays) {
    out.warnings.push_back("n_rays below " + std::to_string(kMinRecommendedRays) + ": estimator is noisy");
  }
  return out;
}

inline MRTResult mrt_at_point(const Vec3& point, const Scene& scene, const MrtConfig& cfg = {}) {
  const ViewFactorEngine engine(scene);
  return mrt_at_point(point, engine, cfg);
}

// ---------------------------------------------------------------------------
// Black-globe reference
// ---------------------------------------------------------------------------

struct GlobeReading {
  double globe_k = 0.0;  // T_g
  double air_k = 0.0;    // T_a
};

/// Standard-globe natural-convection form:
/// T_mrt = (T_g^4 + 0.4e8 (T_g - T_a) |T_g - T_a|^(1/4))^(1/4).
inline double globe_mrt(const GlobeReading& reading) {
  const double tg = reading.globe_k, ta = reading.air_k;
  if (!std::isfinite(tg) || !std::isfinite(ta)) throw Error(ErrorKind::InvalidArgument, "globe reading is not finite");
  if (!(tg > 0.0) || !(ta > 0.0)) throw Error(ErrorKind::InvalidArgument, "globe reading must be > 0 K");
  const double diff = tg - ta;
  const double radicand = tg * tg * tg * tg + kGlobeConvectionCoefficient * diff * std::pow(std::abs(diff), 0.25);
  if (!(radicand > 0.0)) throw Error(ErrorKind::InvalidArgument, "globe reading yields a non-physical MRT");
  return std::pow(radicand, 0.25);
}

}  // namespace radiant
