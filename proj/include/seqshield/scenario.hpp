#pragma once

// World model: vehicles with true and surveillance ETAs, uncertainty
// half-widths and the untrusted set, plus the report model
// tau_hat = tau + delta.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqshield/errors.hpp"
#include "seqshield/random.hpp"

namespace seqshield {

struct Vehicle {
  int id = 0;             // 1-based
  double tau = 0.0;       // true ETA [s]
  double surv_tau = 0.0;  // surveillance-inferred ETA [s]
  double epsilon = 0.0;   // arrival-time uncertainty half-width [s]
  bool untrusted = false;

  friend bool operator==(const Vehicle&, const Vehicle&) = default;
};

/// A generated or loaded world. `vehicles[i]` always has id i+1.
struct Scenario {
  std::vector<Vehicle> vehicles;
  double s_min = 0.0;
  double sigma = 0.0;  // surveillance-noise half-width used at generation
  std::uint64_t seed = 0;

  std::size_t size() const { return vehicles.size(); }
  const Vehicle& vehicle(int id) const { return vehicles.at(static_cast<std::size_t>(id - 1)); }

  std::vector<double> true_etas() const {
    std::vector<double> out;
    out.reserve(vehicles.size());
    for (const auto& v : vehicles) out.push_back(v.tau);
    return out;
  }
  std::vector<double> surveillance_etas() const {
    std::vector<double> out;
    out.reserve(vehicles.size());
    for (const auto& v : vehicles) out.push_back(v.surv_tau);
    return out;
  }
  std::vector<int> untrusted_ids() const {
    std::vector<int> out;
    for (const auto& v : vehicles)
      if (v.untrusted) out.push_back(v.id);
    return out;
  }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Per-vehicle reporting deviations, indexed by id-1.
struct DeviationVector {
  std::vector<double> delta;

  static DeviationVector zeros(std::size_t n) { return {std::vector<double>(n, 0.0)}; }
  double operator[](int id) const { return delta.at(static_cast<std::size_t>(id - 1)); }
  double& operator[](int id) { return delta.at(static_cast<std::size_t>(id - 1)); }

  friend bool operator==(const DeviationVector&, const DeviationVector&) = default;
};

/// Reported ETAs, indexed by id-1.
struct ReportVector {
  std::vector<double> tau_hat;

  friend bool operator==(const ReportVector&, const ReportVector&) = default;
};

// Slack for |surv_tau - tau| <= sigma after floating-point addition.
inline constexpr double kSurveillanceSlack = 1e-9;

/// Throws ValidationError on the first broken invariant.
inline void validate(const Scenario& s) {
  if (s.vehicles.empty()) throw ValidationError("scenario has no vehicles");
  if (!(s.s_min >= 0.0) || !std::isfinite(s.s_min)) throw ValidationError("s_min must be finite and >= 0");
  if (!(s.sigma >= 0.0) || !std::isfinite(s.sigma)) throw ValidationError("sigma must be finite and >= 0");
  for (std::size_t i = 0; i < s.vehicles.size(); ++i) {
    const Vehicle& v = s.vehicles[i];
    if (v.id != static_cast<int>(i + 1))
      throw ValidationError("vehicle ids must be exactly 1..N, got id " + std::to_string(v.id) + " at position " +
                            std::to_string(i + 1));
    if (!std::isfinite(v.tau) || !std::isfinite(v.surv_tau) || !std::isfinite(v.epsilon))
      throw ValidationError("vehicle " + std::to_string(v.id) + " has a non-finite field");
    if (v.epsilon < 0.0) throw ValidationError("vehicle " + std::to_string(v.id) + " has negative epsilon");
    if (std::abs(v.surv_tau - v.tau) > s.sigma + kSurveillanceSlack)
      throw ValidationError("vehicle " + std::to_string(v.id) + " has |surv_tau - tau| > sigma");
    if (v.untrusted && s.sigma > v.epsilon)
      throw ValidationError("sigma exceeds epsilon of untrusted vehicle " + std::to_string(v.id));
  }
}

/// Random scenario: ETAs i.i.d. uniform on [0, horizon], relabelled in
/// ascending ETA order; surveillance noise uniform on [-sigma, sigma];
/// `m_size` untrusted vehicles drawn without replacement.
inline Scenario generate_scenario(std::size_t n, double horizon, double s_min, double sigma, double epsilon,
                                  std::size_t m_size, std::uint64_t seed) {
  if (n == 0) throw ValidationError("n must be >= 1");
  if (!(horizon > 0.0)) throw ValidationError("horizon must be > 0");
  if (!(s_min >= 0.0)) throw ValidationError("s_min must be >= 0");
  if (!(sigma >= 0.0)) throw ValidationError("sigma must be >= 0");
  if (!(epsilon >= 0.0)) throw ValidationError("epsilon must be >= 0");
  if (sigma > epsilon) throw ValidationError("sigma must not exceed epsilon");
  if (m_size > n) throw ValidationError("m_size must not exceed n");

  Rng rng(seed);
  std::vector<double> taus(n);
  for (auto& t : taus) t = rng.uniform(0.0, horizon);
  std::stable_sort(taus.begin(), taus.end());

  Scenario s;
  s.s_min = s_min;
  s.sigma = sigma;
  s.seed = seed;
  s.vehicles.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vehicle& v = s.vehicles[i];
    v.id = static_cast<int>(i + 1);
    v.tau = taus[i];
    v.surv_tau = sigma == 0.0 ? v.tau : v.tau + rng.uniform(-sigma, sigma);
    v.epsilon = epsilon;
  }

  // Partial Fisher-Yates over positions.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t k = 0; k < m_size; ++k) {
    const std::size_t j = k + static_cast<std::size_t>(rng.below(n - k));
    std::swap(idx[k], idx[j]);
    s.vehicles[idx[k]].untrusted = true;
  }
  return s;
}

/// Checks `dev` against the uncertainty sets: zero on trusted vehicles,
/// |delta_i| <= epsilon_i on untrusted ones.
inline void check_deviation(const Scenario& s, const DeviationVector& dev) {
  if (dev.delta.size() != s.size())
    throw ValidationError("deviation vector has " + std::to_string(dev.delta.size()) + " entries, scenario has " +
                          std::to_string(s.size()));
  for (const auto& v : s.vehicles) {
    const double d = dev[v.id];
    if (!std::isfinite(d)) throw ValidationError("non-finite deviation for vehicle " + std::to_string(v.id));
    if (!v.untrusted && d != 0.0)
      throw ValidationError("nonzero deviation for trusted vehicle " + std::to_string(v.id));
    if (std::abs(d) > v.epsilon)
      throw ValidationError("deviation of vehicle " + std::to_string(v.id) + " outside [-epsilon, epsilon]");
  }
}

inline ReportVector apply_deviation(const Scenario& s, const DeviationVector& dev) {
  check_deviation(s, dev);
  ReportVector r;
  r.tau_hat.reserve(s.size());
  for (const auto& v : s.vehicles) r.tau_hat.push_back(v.tau + dev[v.id]);
  return r;
}

// ---- scenario file (JSON) ----

inline std::string serialize_scenario(const Scenario& s) {
  nlohmann::ordered_json j;
  j["s_min"] = s.s_min;
  j["sigma"] = s.sigma;
  j["seed"] = s.seed;
  auto& vs = j["vehicles"] = nlohmann::ordered_json::array();
  for (const auto& v : s.vehicles) {
    nlohmann::ordered_json e;
    e["id"] = v.id;
    e["tau"] = v.tau;
    e["surv_tau"] = v.surv_tau;
    e["epsilon"] = v.epsilon;
    e["untrusted"] = v.untrusted;
    vs.push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

/// Parses and validates a scenario file. Vehicles may appear in any
/// order; they are stored by id.
inline Scenario load_scenario(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("scenario JSON: ") + e.what());
  }

  Scenario s;
  try {
    if (!j.is_object()) throw ParseError("scenario must be a JSON object");
    s.s_min = j.at("s_min").get<double>();
    s.sigma = j.value("sigma", 0.0);
    s.seed = j.value("seed", std::uint64_t{0});
    const auto& vs = j.at("vehicles");
    if (!vs.is_array()) throw ParseError("\"vehicles\" must be an array");
    for (const auto& e : vs) {
      Vehicle v;
      v.id = e.at("id").get<int>();
      v.tau = e.at("tau").get<double>();
      v.surv_tau = e.value("surv_tau", v.tau);
      v.epsilon = e.value("epsilon", 0.0);
      v.untrusted = e.value("untrusted", false);
      s.vehicles.push_back(v);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scenario fields: ") + e.what());
  }

  std::sort(s.vehicles.begin(), s.vehicles.end(), [](const Vehicle& a, const Vehicle& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < s.vehicles.size(); ++i)
    if (s.vehicles[i].id == s.vehicles[i - 1].id)
      throw ValidationError("duplicate vehicle id " + std::to_string(s.vehicles[i].id));
  validate(s);
  return s;
}

}  // namespace seqshield
