#pragma once

// JSON encodings for codes, structure reports, campaigns, sweeps and bounds.

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bostbc/codes.hpp"
#include "bostbc/decoder.hpp"
#include "bostbc/random.hpp"
#include "bostbc/sim.hpp"
#include "bostbc/structure.hpp"

namespace bostbc {

using Json = nlohmann::json;

inline Json profile_to_json(const std::optional<BlockOrthogonalProfile>& p) {
  if (!p) return nullptr;
  return Json::array({p->gamma_blocks, p->k, p->gamma});
}

inline std::optional<BlockOrthogonalProfile> profile_from_json(const Json& j) {
  if (j.is_null()) return std::nullopt;
  if (!j.is_array() || j.size() != 3) throw Error(Errc::Parse, "profile must be [Gamma, k, gamma] or null");
  BlockOrthogonalProfile p{j[0].get<std::size_t>(), j[1].get<std::size_t>(), j[2].get<std::size_t>()};
  p.validate();
  return p;
}

inline Json matrix_to_json(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline ComplexMatrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty())
    throw Error(Errc::Parse, "matrix must be a non-empty list of rows");
  ComplexMatrix m(j.size(), j[0].size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].size() != m.cols()) throw Error(Errc::Parse, "ragged matrix rows");
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const Json& e = j[i][c];
      if (!e.is_array() || e.size() != 2) throw Error(Errc::Parse, "entry must be [re, im]");
      m(i, c) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

/// Doubles are written with round-trip precision, so a decode of an encode
/// is bit-exact.
inline Json code_to_json(const LinearSTBC& code) {
  Json w = Json::array();
  for (const auto& a : code.weights) w.push_back(matrix_to_json(a));
  return {{"n_t", code.n_t},           {"t", code.t},
          {"k_real", code.k_real()},   {"labels", code.labels},
          {"ordering", code.ordering}, {"weights", std::move(w)},
          {"declared_profile", profile_to_json(code.declared_profile)}};
}

inline LinearSTBC code_from_json(const Json& j) {
  try {
    LinearSTBC code;
    code.n_t = j.at("n_t").get<std::size_t>();
    code.t = j.at("t").get<std::size_t>();
    for (const auto& w : j.at("weights")) code.weights.push_back(matrix_from_json(w));
    code.labels = j.at("labels").get<std::vector<std::string>>();
    if (j.contains("ordering"))
      code.ordering = j.at("ordering").get<std::vector<std::size_t>>();
    else
      code.ordering = identity_permutation(code.weights.size());
    if (j.contains("k_real") && j.at("k_real").get<std::size_t>() != code.weights.size())
      throw Error(Errc::Parse, "k_real differs from weight count");
    if (j.contains("declared_profile")) code.declared_profile = profile_from_json(j.at("declared_profile"));
    validate(code);
    return code;
  } catch (const Json::exception& e) {
    throw Error(Errc::Parse, e.what());
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Parse, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(Errc::Parse, path + ": " + e.what());
  }
}

inline Json conditions_to_json(const std::vector<ConditionResult>& cs) {
  Json out = Json::array();
  for (const auto& c : cs) out.push_back({{"name", c.name}, {"pass", c.pass}, {"residual", c.residual}});
  return out;
}

inline Json report_to_json(const StructureReport& rep) {
  Json j = {{"classification", classification_name(rep.classification)},
            {"profile", profile_to_json(rep.profile)},
            {"conditions", conditions_to_json(rep.conditions)},
            {"tol", rep.tol},
            {"seeds", rep.seeds},
            {"label", rep.label()}};
  std::vector<std::string> grid;
  std::istringstream rows(pattern_to_grid(rep.pattern));
  for (std::string line; std::getline(rows, line);) grid.push_back(line);
  j["pattern"] = grid;
  if (rep.groups) j["groups"] = rep.groups;
  if (rep.fast_decodable_size) j["fast_decodable_size"] = rep.fast_decodable_size;
  return j;
}

inline Json verification_to_json(const VerificationReport& rep) {
  return {{"name", rep.name}, {"passed", rep.passed()}, {"conditions", conditions_to_json(rep.conditions)},
          {"notes", rep.notes}};
}

inline Json stats_to_json(const DecoderStats& s) {
  return {{"em_evaluations", s.em_evaluations}, {"nodes_visited", s.nodes_visited},
          {"flops", s.flops},                   {"cache_hits", s.cache_hits},
          {"cache_entries_peak", s.cache_entries_peak}, {"best_metric", s.best_metric},
          {"decoded", s.decoded}};
}

inline Json bounds_to_json(const BlockOrthogonalProfile& p, std::uint64_t m) {
  const EmCountBounds b = em_count_bounds(p, m);
  const Rational q = qrdm_bound(p.k, p.gamma, m);
  return {{"profile", profile_to_json(p)},
          {"m", m},
          {"o_stbc", b.o_stbc},
          {"o_bostbc", b.o_bostbc},
          {"emrr", b.emrr.to_string()},
          {"emrr_value", b.emrr.value()},
          {"mem_entries", b.mem_entries},
          {"qrdm_ratio", q.to_string()},
          {"qrdm_ratio_value", q.value()}};
}

inline SimulationCampaign campaign_from_json(const Json& j) {
  try {
    SimulationCampaign c;
    c.code_id = j.at("code").get<std::string>();
    if (j.contains("ordering")) c.ordering = j.at("ordering").get<std::vector<std::string>>();
    if (j.contains("m")) c.m = j.at("m").get<unsigned>();
    if (j.contains("snr_grid_db")) c.snr_grid_db = j.at("snr_grid_db").get<std::vector<double>>();
    if (j.contains("trials_per_point")) c.trials_per_point = j.at("trials_per_point").get<std::size_t>();
    if (j.contains("master_seed")) c.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("workers")) c.workers = j.at("workers").get<std::size_t>();
    for (const auto& [key, value] : j.items()) {
      static const std::vector<std::string> known = {"code", "ordering", "m", "snr_grid_db", "trials_per_point",
                                                     "master_seed", "workers"};
      if (std::find(known.begin(), known.end(), key) == known.end())
        throw Error(Errc::InvalidConfig, "unknown campaign key '" + key + "'");
    }
    c.validate();
    return c;
  } catch (const Json::exception& e) {
    throw Error(Errc::InvalidConfig, e.what());
  }
}

inline Json campaign_to_json(const SimulationCampaign& c) {
  Json j = {{"code", c.code_id},
            {"m", c.m},
            {"snr_grid_db", c.snr_grid_db},
            {"trials_per_point", c.trials_per_point},
            {"master_seed", c.master_seed},
            {"workers", c.workers}};
  if (!c.ordering.empty()) j["ordering"] = c.ordering;
  return j;
}

inline Json sweep_to_json(const SimulationCampaign& c, const SweepResult& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"snr_db", row.snr_db},
                    {"trials", row.trials},
                    {"mean_em_baseline", row.mean_em_baseline},
                    {"mean_em_memoized", row.mean_em_memoized},
                    {"emrr", row.emrr},
                    {"mean_flops_baseline", row.mean_flops_baseline},
                    {"mean_flops_memoized", row.mean_flops_memoized},
                    {"flop_reduction_pct", row.flop_reduction_pct},
                    {"seed", row.seed},
                    {"cache_entries_peak", row.cache_entries_peak},
                    {"mismatches", row.mismatches}});
  return {{"campaign", campaign_to_json(c)},
          {"profile", profile_to_json(r.profile)},
          {"mem_bound", r.mem_bound},
          {"snr_convention", kSnrConvention},
          {"gaussian", kGaussianAlgorithm},
          {"rows", std::move(rows)}};
}

}  // namespace bostbc
