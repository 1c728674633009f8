#pragma once

// Result CSV (column order is a contract with downstream plotting) and
// the run manifest.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqshield/detail/format.hpp"
#include "seqshield/errors.hpp"
#include "seqshield/experiments.hpp"

namespace seqshield {

inline constexpr const char* kResultsHeader =
    "case,rep,seed,n,s_min,sigma,epsilon,m_size,rule_w,rule_kappa,cost_true,cost_reported,max_delay,kendall_tau,"
    "deviator_gain,bystander_harm,br_converged,inadmissible_count";

inline std::string format_row(const CaseResult& r) {
  using detail::shortest;
  std::ostringstream os;
  os << r.case_id << ',' << r.rep << ',' << r.scenario.seed << ',' << r.scenario.n << ','
     << shortest(r.scenario.s_min) << ',' << shortest(r.scenario.sigma) << ',' << shortest(r.scenario.epsilon) << ','
     << r.scenario.m_size << ',' << shortest(r.theta.w) << ',' << shortest(r.theta.kappa) << ','
     << shortest(r.metrics.cost_true) << ',' << shortest(r.metrics.cost_reported) << ','
     << shortest(r.metrics.max_delay) << ',' << r.metrics.kendall_tau << ',' << shortest(r.metrics.deviator_gain) << ','
     << shortest(r.metrics.bystander_harm) << ',' << (r.br_converged ? 1 : 0) << ',' << r.inadmissible_count;
  return os.str();
}

inline std::string results_csv(const std::vector<CaseResult>& rows) {
  std::string out = kResultsHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += format_row(r);
    out += '\n';
  }
  return out;
}

/// Hex FNV-1a-64 of the given bytes.
inline std::string content_digest(const std::string& bytes) { return detail::hex64(detail::fnv1a64(bytes)); }

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write to '" + path.string() + "' failed");
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

/// Writes the CSV and returns its digest.
inline std::string write_results(const std::vector<CaseResult>& rows, const std::filesystem::path& path) {
  const std::string bytes = results_csv(rows);
  write_file(path, bytes);
  return content_digest(bytes);
}

inline constexpr const char* kToolVersion = "0.1.0";

/// Manifest: everything needed to re-run plus digests of what was written.
/// `config` carries the resolved configuration; timestamps are the only
/// non-reproducible fields.
struct RunManifest {
  std::string command;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::uint64_t master_seed = 0;
  std::vector<std::pair<std::string, std::uint64_t>> cell_seeds;  // label -> seed
  std::string started_utc;
  std::string finished_utc;
  std::vector<std::pair<std::string, std::string>> outputs;  // path -> digest

  std::string to_json() const {
    nlohmann::ordered_json j;
    j["tool"] = "seqshield";
    j["version"] = kToolVersion;
    j["command"] = command;
    j["config"] = config;
    j["master_seed"] = master_seed;
    auto& cells = j["cell_seeds"] = nlohmann::ordered_json::array();
    for (const auto& [label, seed] : cell_seeds) cells.push_back({{"cell", label}, {"seed", seed}});
    j["started_utc"] = started_utc;
    j["finished_utc"] = finished_utc;
    auto& outs = j["outputs"] = nlohmann::ordered_json::array();
    for (const auto& [path, digest] : outputs) outs.push_back({{"path", path}, {"fnv1a64", digest}});
    return j.dump(2) + "\n";
  }
};

}  // namespace seqshield
