#pragma once

// Seven-case study (truthful / self-interested / malicious reporting under
// baseline and tuned rules) and sensitivity sweeps.
//
//   case  reports                      rule
//   1     truthful                     baseline
//   2     truthful                     tuned vs self-interested
//   3     truthful                     tuned vs malicious
//   4     best responses to baseline   baseline
//   5     best responses to tuned      tuned vs self-interested
//   6     worst case vs baseline       baseline
//   7     worst case vs tuned          tuned vs malicious

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "seqshield/adversary.hpp"
#include "seqshield/coordinator.hpp"
#include "seqshield/detail/format.hpp"
#include "seqshield/errors.hpp"
#include "seqshield/rules.hpp"
#include "seqshield/scenario.hpp"
#include "seqshield/schedule_core.hpp"

namespace seqshield {

struct Metrics {
  double cost_true = 0.0;
  double cost_reported = 0.0;
  std::vector<double> per_vehicle_cost_true;
  double max_delay = 0.0;
  int kendall_tau = 0;
  double deviator_gain = 0.0;
  double bystander_harm = 0.0;
};

struct ScenarioDescriptor {
  std::size_t n = 0;
  double s_min = 0.0;
  double sigma = 0.0;
  double epsilon = 0.0;
  std::size_t m_size = 0;
  std::uint64_t seed = 0;
};

struct CaseResult {
  int case_id = 0;
  int rep = 0;
  ScenarioDescriptor scenario;
  RuleParams theta;
  Metrics metrics;
  bool br_converged = true;
  int inadmissible_count = 0;
};

inline ScenarioDescriptor describe(const Scenario& s) {
  ScenarioDescriptor d;
  d.n = s.size();
  d.s_min = s.s_min;
  d.sigma = s.sigma;
  d.seed = s.seed;
  for (const auto& v : s.vehicles) {
    d.epsilon = std::max(d.epsilon, v.epsilon);
    if (v.untrusted) ++d.m_size;
  }
  return d;
}

/// Number of discordant pairs between a landing order and the order by
/// true ETA (ties by id).
inline int discordant_pairs(const std::vector<int>& order, const Scenario& s) {
  std::vector<int> pos(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) pos[static_cast<std::size_t>(order[k] - 1)] = static_cast<int>(k);
  auto before_true = [&](int a, int b) {
    const double ta = s.vehicle(a).tau, tb = s.vehicle(b).tau;
    return ta < tb || (ta == tb && a < b);
  };
  int count = 0;
  for (int a = 1; a <= static_cast<int>(order.size()); ++a)
    for (int b = a + 1; b <= static_cast<int>(order.size()); ++b) {
      const bool assigned = pos[static_cast<std::size_t>(a - 1)] < pos[static_cast<std::size_t>(b - 1)];
      if (assigned != before_true(a, b)) ++count;
    }
  return count;
}

/// Truthful reports under the baseline rule.
inline Schedule truthful_baseline(const Scenario& s) {
  return apply_rule(ReportVector{s.true_etas()}, s, RuleParams::baseline());
}

inline Metrics compute_metrics(const Schedule& schedule, const Scenario& s, const DeviationVector& deltas) {
  if (schedule.times.size() != s.size() || deltas.delta.size() != s.size())
    throw ValidationError("compute_metrics: dimension mismatch");
  const std::vector<double> tau = s.true_etas();
  std::vector<double> reported(tau);
  for (std::size_t i = 0; i < reported.size(); ++i) reported[i] += deltas.delta[i];

  Metrics m;
  const ScheduleCost achieved = schedule_cost(schedule, tau);
  const ScheduleCost truthful = schedule_cost(truthful_baseline(s), tau);
  m.cost_true = achieved.total;
  m.per_vehicle_cost_true = achieved.per_vehicle;
  m.cost_reported = schedule_cost(schedule, reported).total;
  for (std::size_t i = 0; i < tau.size(); ++i) m.max_delay = std::max(m.max_delay, schedule.times[i] - tau[i]);
  m.kendall_tau = discordant_pairs(schedule.order, s);
  for (const auto& v : s.vehicles) {
    const std::size_t i = static_cast<std::size_t>(v.id - 1);
    if (v.untrusted)
      m.deviator_gain += truthful.per_vehicle[i] - achieved.per_vehicle[i];
    else
      m.bystander_harm += achieved.per_vehicle[i] - truthful.per_vehicle[i];
  }
  return m;
}

// Best-response, attack and outer-evaluation settings for a study run.
using SearchConfigs = TuneOptions;

/// Runs the requested cases (1..7) on one scenario. Tuning is done at most
/// once per mode and shared by the cases that need it. Results come back in
/// ascending case order.
inline std::vector<CaseResult> run_cases(const Scenario& s, std::vector<int> case_ids,
                                         const std::vector<RuleParams>& theta_grid, const SearchConfigs& cfg = {},
                                         int rep = 0) {
  for (int c : case_ids)
    if (c < 1 || c > 7) throw ValidationError("invalid case id " + std::to_string(c));
  std::sort(case_ids.begin(), case_ids.end());
  case_ids.erase(std::unique(case_ids.begin(), case_ids.end()), case_ids.end());

  std::optional<TuneResult> self_tuned, mal_tuned;
  auto self = [&]() -> const TuneResult& {
    if (!self_tuned) self_tuned = tune_self_interested(s, theta_grid, cfg);
    return *self_tuned;
  };
  auto mal = [&]() -> const TuneResult& {
    if (!mal_tuned) mal_tuned = tune_malicious(s, theta_grid, cfg);
    return *mal_tuned;
  };

  const ScenarioDescriptor desc = describe(s);
  std::vector<CaseResult> out;
  for (int c : case_ids) {
    RuleParams theta = RuleParams::baseline();
    DeviationVector d = DeviationVector::zeros(s.size());
    bool converged = true;
    switch (c) {
      case 1:
        break;
      case 2:
        theta = self().theta_star;
        break;
      case 3:
        theta = mal().theta_star;
        break;
      case 4: {
        const FixedPointResult fp = iterated_best_response(s, theta, cfg.best_response);
        d = fp.deltas;
        converged = fp.converged;
        break;
      }
      case 5: {
        theta = self().theta_star;
        const FixedPointResult fp = iterated_best_response(s, theta, cfg.best_response);
        d = fp.deltas;
        converged = fp.converged;
        break;
      }
      case 6:
        d = worst_case_deviation(s, theta, cfg.attack).deltas;
        break;
      case 7:
        theta = mal().theta_star;
        d = worst_case_deviation(s, theta, cfg.attack).deltas;
        break;
    }
    const ReportVector reports = apply_deviation(s, d);
    const Schedule sch = apply_rule(reports, s, theta);
    CaseResult r;
    r.case_id = c;
    r.rep = rep;
    r.scenario = desc;
    r.theta = theta;
    r.metrics = compute_metrics(sch, s, d);
    r.br_converged = converged;
    r.inadmissible_count = count_inadmissible(reports, s);
    out.push_back(std::move(r));
  }
  return out;
}

inline CaseResult run_case(const Scenario& s, int case_id, const std::vector<RuleParams>& theta_grid,
                           const SearchConfigs& cfg = {}) {
  return run_cases(s, {case_id}, theta_grid, cfg).front();
}

// ---- sweeps ----

/// Generation parameters for one study cell. Unset sigma means epsilon/2,
/// unset horizon means 10*s_min.
struct BaseConfig {
  std::size_t n = 6;
  double s_min = 2.0;
  double epsilon = 0.5;
  std::optional<double> sigma;
  std::optional<double> horizon;
  std::size_t m_size = 1;

  double resolved_sigma() const { return sigma ? *sigma : epsilon / 2.0; }
  double resolved_horizon() const { return horizon ? *horizon : 10.0 * s_min; }
};

inline const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> names{"n", "s_min", "sigma", "m_size", "epsilon"};
  return names;
}

inline BaseConfig with_parameter(BaseConfig cfg, const std::string& param, double value) {
  auto as_count = [&](double v) {
    if (!(v >= 0.0) || v != std::floor(v)) throw ValidationError(param + " must be a nonnegative integer");
    return static_cast<std::size_t>(v);
  };
  if (param == "n")
    cfg.n = as_count(value);
  else if (param == "s_min")
    cfg.s_min = value;
  else if (param == "sigma")
    cfg.sigma = value;
  else if (param == "m_size")
    cfg.m_size = as_count(value);
  else if (param == "epsilon")
    cfg.epsilon = value;
  else
    throw ValidationError("unknown sweep parameter '" + param + "'");
  return cfg;
}

/// master ^ FNV-1a("param=value;rep=k"), value in shortest round-trip form.
inline std::uint64_t cell_seed(std::uint64_t master, const std::string& param, double value, int rep) {
  const std::string key = param + "=" + detail::shortest(value) + ";rep=" + std::to_string(rep);
  return master ^ detail::fnv1a64(key);
}

struct SweepCell {
  double value = 0.0;
  int rep = 0;
  std::uint64_t seed = 0;
};

inline std::vector<SweepCell> sweep_cells(const std::string& param, const std::vector<double>& values, int reps,
                                          std::uint64_t seed) {
  std::vector<SweepCell> cells;
  for (double v : values)
    for (int r = 0; r < reps; ++r) cells.push_back({v, r, cell_seed(seed, param, v, r)});
  return cells;
}

/// All seven cases for every (value, rep) cell. Output order is
/// (value, rep, case) regardless of `jobs`.
inline std::vector<CaseResult> run_sweep(const BaseConfig& base, const std::string& param,
                                         const std::vector<double>& values, int reps, std::uint64_t seed,
                                         const std::vector<RuleParams>& theta_grid, const SearchConfigs& cfg = {},
                                         int jobs = 1) {
  if (reps < 1) throw ValidationError("reps must be >= 1");
  if (values.empty()) throw ValidationError("sweep values are empty");
  if (std::find(sweep_parameters().begin(), sweep_parameters().end(), param) == sweep_parameters().end())
    throw ValidationError("unknown sweep parameter '" + param + "'");

  const std::vector<SweepCell> cells = sweep_cells(param, values, reps, seed);
  std::vector<BaseConfig> configs;
  for (const auto& c : cells) configs.push_back(with_parameter(base, param, c.value));
  // Surface generation errors before spawning workers.
  std::vector<Scenario> scenarios;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const BaseConfig& b = configs[i];
    scenarios.push_back(generate_scenario(b.n, b.resolved_horizon(), b.s_min, b.resolved_sigma(), b.epsilon,
                                          b.m_size, cells[i].seed));
  }

  std::vector<std::vector<CaseResult>> slots(cells.size());
  auto work = [&](std::size_t i) {
    slots[i] = run_cases(scenarios[i], {1, 2, 3, 4, 5, 6, 7}, theta_grid, cfg, cells[i].rep);
  };
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, cells.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) work(i);
  } else {
    std::vector<std::jthread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < cells.size(); i += workers) work(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    pool.clear();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  std::vector<CaseResult> out;
  for (auto& s : slots)
    for (auto& r : s) out.push_back(std::move(r));
  return out;
}

}  // namespace seqshield
