#pragma once

// JSON renderings of view-factor and MRT results.

#include "radiant/mrt.hpp"
#include "radiant/scene_io.hpp"
#include "radiant/viewfactor.hpp"

namespace radiant {

inline Json view_factors_to_json(const ViewFactorSet& vfs) {
  Json entries = Json::object();
  for (const auto& [id, f] : vfs.entries) {
    const auto c = vfs.counts.find(id);
    entries[id] = {{"view_factor", f}, {"hits", c == vfs.counts.end() ? 0 : c->second}};
  }
  return {{"entries", std::move(entries)},
          {"total_hit_fraction", vfs.total_hit_fraction},
          {"hits", vfs.hits},
          {"n_rays", vfs.n_rays},
          {"seed", vfs.seed},
          {"warnings", vfs.warnings}};
}

inline Json mrt_result_to_json(const MRTResult& r, bool celsius = false) {
  Json contributions = Json::array();
  for (const auto& c : r.contributions) {
    Json jc{{"id", c.id}, {"view_factor", c.view_factor}, {"temperature_k", c.temperature_k}, {"share", c.share}};
    if (celsius) jc["temperature_c"] = to_celsius(c.temperature_k);
    contributions.push_back(std::move(jc));
  }
  Json out{{"mrt_k", r.mrt_k},
           {"view_factor_sum", r.view_factor_sum},
           {"contributions", std::move(contributions)},
           {"n_rays", r.n_rays},
           {"seed", r.seed},
           {"warnings", r.warnings}};
  if (celsius) out["mrt_c"] = to_celsius(r.mrt_k);
  return out;
}

}  // namespace radiant
