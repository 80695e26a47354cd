#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cohinfo/tomography.hpp"

namespace cohinfo {

/// Count-record wire format:
///   {dim, settings: [{projectors: [[[re, im], ...], ...], counts: [...]}],
///    shots, seed}
/// Each projector is encoded by its defining unit vector.
inline nlohmann::json counts_to_json(const CountRecord& counts, const ProjectorSet& ps) {
  if (counts.dim != ps.dim ||
      counts.counts.size() != static_cast<std::size_t>(ps.setting_count()))
    throw std::invalid_argument("counts_to_json: counts do not match projector set");
  nlohmann::json settings = nlohmann::json::array();
  for (int s = 0; s < ps.setting_count(); ++s) {
    nlohmann::json projectors = nlohmann::json::array();
    for (const std::vector<cplx>& v : ps.settings[s].basis) {
      nlohmann::json vec = nlohmann::json::array();
      for (const cplx& z : v) vec.push_back({z.real(), z.imag()});
      projectors.push_back(std::move(vec));
    }
    settings.push_back({{"projectors", std::move(projectors)}, {"counts", counts.counts[s]}});
  }
  return {{"dim", counts.dim},
          {"settings", std::move(settings)},
          {"shots", counts.shots_per_setting},
          {"seed", counts.seed}};
}

inline std::pair<CountRecord, ProjectorSet> counts_from_json(const nlohmann::json& j) {
  CountRecord counts;
  ProjectorSet ps;
  counts.dim = ps.dim = j.at("dim").get<int>();
  counts.shots_per_setting = j.at("shots").get<std::int64_t>();
  counts.seed = j.at("seed").get<std::uint64_t>();
  for (const nlohmann::json& s : j.at("settings")) {
    MeasurementSetting setting;
    for (const nlohmann::json& vec : s.at("projectors")) {
      std::vector<cplx> v;
      for (const nlohmann::json& z : vec) v.emplace_back(z.at(0).get<double>(), z.at(1).get<double>());
      if (static_cast<int>(v.size()) != ps.dim)
        throw std::invalid_argument("counts_from_json: projector length mismatch");
      setting.basis.push_back(std::move(v));
    }
    ps.settings.push_back(std::move(setting));
    counts.counts.push_back(s.at("counts").get<std::vector<std::int64_t>>());
  }
  return {std::move(counts), std::move(ps)};
}

}  // namespace cohinfo
