#pragma once

// The parameterized sequencing rule: screen reports of untrusted
// vehicles against surveillance, turn them into effective ETAs, then
// schedule on those.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "seqshield/errors.hpp"
#include "seqshield/scenario.hpp"
#include "seqshield/schedule_core.hpp"

namespace seqshield {

/// Rule parameters, shared across the untrusted set.
///   w     : 0 uses the (clamped) report, 1 uses the surveillance ETA.
///   kappa : shrinks the admissible interval to surv_tau +/- kappa*epsilon.
struct RuleParams {
  double w = 0.0;
  double kappa = 1.0;

  static constexpr RuleParams baseline() { return {0.0, 1.0}; }

  friend bool operator==(const RuleParams&, const RuleParams&) = default;
};

inline void validate(const RuleParams& p) {
  if (!(p.w >= 0.0 && p.w <= 1.0)) throw ValidationError("rule weight w must lie in [0,1]");
  if (!(p.kappa >= 0.0 && p.kappa <= 1.0)) throw ValidationError("rule kappa must lie in [0,1]");
}

inline constexpr double kAdmissibleTol = 1e-12;

inline bool admissible(double report, double surv_tau, double epsilon) {
  return std::abs(report - surv_tau) <= epsilon + kAdmissibleTol;
}

/// Effective ETA of one untrusted vehicle.
inline double effective_eta(double report, const Vehicle& v, const RuleParams& p) {
  const double half = p.kappa * v.epsilon;
  const double clamped = std::clamp(report, v.surv_tau - half, v.surv_tau + half);
  // lerp is exact at both ends: w == 1 yields surv_tau, clamped == surv_tau yields it unchanged.
  return std::lerp(clamped, v.surv_tau, p.w);
}

inline std::vector<double> effective_etas(const ReportVector& reports, const Scenario& s, const RuleParams& p) {
  if (reports.tau_hat.size() != s.size())
    throw ValidationError("report vector has " + std::to_string(reports.tau_hat.size()) + " entries, scenario has " +
                          std::to_string(s.size()));
  std::vector<double> u(reports.tau_hat);
  for (const auto& v : s.vehicles)
    if (v.untrusted) u[static_cast<std::size_t>(v.id - 1)] = effective_eta(u[static_cast<std::size_t>(v.id - 1)], v, p);
  return u;
}

inline Schedule apply_rule(const ReportVector& reports, const Scenario& s, const RuleParams& p) {
  return solve_schedule(effective_etas(reports, s, p), s.s_min);
}

/// Number of reports outside their vehicle's surveillance interval.
inline int count_inadmissible(const ReportVector& reports, const Scenario& s) {
  int n = 0;
  for (const auto& v : s.vehicles)
    if (!admissible(reports.tau_hat[static_cast<std::size_t>(v.id - 1)], v.surv_tau, v.epsilon)) ++n;
  return n;
}

}  // namespace seqshield
