#pragma once

// Outer tuning of the rule parameters by exhaustive grid search, against
// self-interested misreporting (best responses to each candidate rule) or
// malicious spoofing (min over rules of the worst-case attack).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "seqshield/adversary.hpp"
#include "seqshield/errors.hpp"
#include "seqshield/rules.hpp"
#include "seqshield/scenario.hpp"
#include "seqshield/schedule_core.hpp"

namespace seqshield {

enum class TuneMode { self_interested, malicious };

inline const char* to_string(TuneMode m) { return m == TuneMode::self_interested ? "self" : "malicious"; }

struct ThetaEvaluation {
  RuleParams theta;
  double objective = 0.0;
  DeviationVector deltas;  // best-response profile or worst-case attack at this theta
  bool converged = true;   // best-response convergence (always true for malicious)
};

struct TuneResult {
  RuleParams theta_star;
  double objective = 0.0;
  std::vector<ThetaEvaluation> per_theta;  // sorted by (w, kappa)
  TuneMode mode = TuneMode::self_interested;

  const ThetaEvaluation& at(const RuleParams& p) const {
    for (const auto& e : per_theta)
      if (e.theta == p) return e;
    throw ValidationError("theta not in tuning grid");
  }
  const ThetaEvaluation& best() const { return at(theta_star); }
};

struct TuneOptions {
  BestResponseConfig best_response;
  AttackConfig attack;
  // Evaluate the outer objective against surveillance ETAs instead of the
  // (unobservable) true ETAs.
  bool eval_proxy = false;
};

/// w in {0, 0.1, ..., 1} x kappa in {0.25, 0.5, 0.75, 1}, plus the baseline.
inline std::vector<RuleParams> default_theta_grid() {
  std::vector<RuleParams> g;
  for (int wi = 0; wi <= 10; ++wi)
    for (double k : {0.25, 0.5, 0.75, 1.0}) g.push_back({wi / 10.0, k});
  if (std::find(g.begin(), g.end(), RuleParams::baseline()) == g.end()) g.push_back(RuleParams::baseline());
  return g;
}

/// Grid from "start:stop:step" values for w and an explicit kappa list.
inline std::vector<RuleParams> make_theta_grid(double w_start, double w_stop, double w_step,
                                               const std::vector<double>& kappas, bool include_baseline = true) {
  if (!(w_step > 0.0)) throw ValidationError("w grid step must be > 0");
  if (kappas.empty()) throw ValidationError("kappa grid is empty");
  std::vector<RuleParams> g;
  const int count = static_cast<int>(std::floor((w_stop - w_start) / w_step + 1e-9)) + 1;
  for (int i = 0; i < count; ++i) {
    const double w = std::min(w_start + w_step * i, w_stop);
    for (double k : kappas) {
      RuleParams p{w, k};
      validate(p);
      g.push_back(p);
    }
  }
  if (include_baseline && std::find(g.begin(), g.end(), RuleParams::baseline()) == g.end())
    g.push_back(RuleParams::baseline());
  return g;
}

namespace detail {

inline double outer_objective(const Scenario& s, const RuleParams& p, const DeviationVector& d, bool proxy) {
  ReportVector r;
  r.tau_hat.resize(s.size());
  for (const auto& v : s.vehicles) r.tau_hat[index_of(v.id)] = v.tau + d[v.id];
  const Schedule sch = apply_rule(r, s, p);
  return schedule_cost(sch, proxy ? s.surveillance_etas() : s.true_etas()).total;
}

// Sorts by (w, kappa), then picks the minimum; ties go to
// smaller w, then larger kappa.
inline TuneResult finish(std::vector<ThetaEvaluation> evals, TuneMode mode) {
  std::sort(evals.begin(), evals.end(), [](const ThetaEvaluation& a, const ThetaEvaluation& b) {
    if (a.theta.w != b.theta.w) return a.theta.w < b.theta.w;
    return a.theta.kappa < b.theta.kappa;
  });
  TuneResult out;
  out.mode = mode;
  const ThetaEvaluation* best = nullptr;
  for (const auto& e : evals) {
    if (!best || e.objective < best->objective ||
        (e.objective == best->objective &&
         (e.theta.w < best->theta.w || (e.theta.w == best->theta.w && e.theta.kappa > best->theta.kappa))))
      best = &e;
  }
  out.theta_star = best->theta;
  out.objective = best->objective;
  out.per_theta = std::move(evals);
  return out;
}

inline std::vector<RuleParams> unique_grid(const std::vector<RuleParams>& grid) {
  if (grid.empty()) throw ValidationError("theta grid is empty");
  std::vector<RuleParams> g;
  for (const auto& p : grid) {
    validate(p);
    if (std::find(g.begin(), g.end(), p) == g.end()) g.push_back(p);
  }
  return g;
}

}  // namespace detail

/// Coordinator commits to each theta; untrusted vehicles best-respond
/// (from truthful reports, no warm start); theta is scored on the true
/// system cost of the resulting schedule.
inline ThetaEvaluation evaluate_self_interested(const Scenario& s, const RuleParams& p, const TuneOptions& opt = {}) {
  const FixedPointResult fp = iterated_best_response(s, p, opt.best_response);
  return {p, detail::outer_objective(s, p, fp.deltas, opt.eval_proxy), fp.deltas, fp.converged};
}

inline ThetaEvaluation evaluate_malicious(const Scenario& s, const RuleParams& p, const TuneOptions& opt = {}) {
  const AttackResult atk = worst_case_deviation(s, p, opt.attack);
  const double obj = opt.eval_proxy ? detail::outer_objective(s, p, atk.deltas, true) : atk.worst_cost;
  return {p, obj, atk.deltas, true};
}

inline TuneResult tune_self_interested(const Scenario& s, const std::vector<RuleParams>& theta_grid,
                                       const TuneOptions& opt = {}) {
  std::vector<ThetaEvaluation> evals;
  for (const auto& p : detail::unique_grid(theta_grid)) evals.push_back(evaluate_self_interested(s, p, opt));
  return detail::finish(std::move(evals), TuneMode::self_interested);
}

inline TuneResult tune_malicious(const Scenario& s, const std::vector<RuleParams>& theta_grid,
                                 const TuneOptions& opt = {}) {
  std::vector<ThetaEvaluation> evals;
  for (const auto& p : detail::unique_grid(theta_grid)) evals.push_back(evaluate_malicious(s, p, opt));
  return detail::finish(std::move(evals), TuneMode::malicious);
}

inline TuneResult tune(const Scenario& s, TuneMode mode, const std::vector<RuleParams>& theta_grid,
                       const TuneOptions& opt = {}) {
  return mode == TuneMode::self_interested ? tune_self_interested(s, theta_grid, opt)
                                           : tune_malicious(s, theta_grid, opt);
}

}  // namespace seqshield
