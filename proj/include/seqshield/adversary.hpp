#pragma once

// False-reporting behaviour under a fixed rule.
//
// A self-interested vehicle picks the surveillance-consistent deviation
// that minimizes its own adjustment cost given the others' reports; with
// several such vehicles we run Gauss-Seidel best-response sweeps. A
// malicious attacker picks deviations for the whole untrusted set that
// maximize the true system cost.
//
// The own-cost landscape is piecewise quadratic in delta_i with jumps where
// the landing order changes, so both searches evaluate a uniform grid plus
// the order breakpoints (offset by +/- kBreakpointOffset, since the id
// tie-break makes the cost discontinuous exactly there).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "seqshield/errors.hpp"
#include "seqshield/rules.hpp"
#include "seqshield/scenario.hpp"
#include "seqshield/schedule_core.hpp"

namespace seqshield {

inline constexpr double kBreakpointOffset = 1e-9;
inline constexpr double kCostTieTol = 1e-12;

struct BestResponseConfig {
  int grid_points = 201;
  int max_iters = 100;
  double tol = 1e-9;
};

struct AttackConfig {
  int grid_points_per_dim = 21;
  int refine_iters = 2;
  std::size_t max_grid_cells = 1'000'000;
};

struct BestResponseResult {
  double delta_star = 0.0;
  double own_cost = 0.0;
  double grid_resolution = 0.0;
  int candidates_evaluated = 0;
};

struct FixedPointResult {
  DeviationVector deltas;
  bool converged = false;
  int iterations = 0;
};

struct AttackResult {
  DeviationVector deltas;
  double worst_cost = 0.0;
  int candidates_evaluated = 0;
};

namespace detail {

inline std::size_t index_of(int id) { return static_cast<std::size_t>(id - 1); }

// Uniform grid over [-eps, eps] with `points` nodes; always contains 0.
inline std::vector<double> deviation_grid(double eps, int points) {
  std::vector<double> g;
  if (eps == 0.0 || points < 2) return {0.0};
  g.reserve(static_cast<std::size_t>(points) + 1);
  const double step = 2.0 * eps / static_cast<double>(points - 1);
  for (int k = 0; k < points; ++k) g.push_back(k == points - 1 ? eps : -eps + step * k);
  g.push_back(0.0);
  return g;
}

// Deviations of vehicle `v` at which its effective ETA ties another
// vehicle's effective ETA, bracketed by +/- kBreakpointOffset and kept
// inside [-eps, eps].
inline void append_breakpoints(std::vector<double>& out, const Vehicle& v, const RuleParams& p,
                               const std::vector<double>& effective) {
  if (p.w >= 1.0) return;  // effective ETA does not depend on the report
  const double half = p.kappa * v.epsilon;
  const double lo = v.surv_tau - half;
  const double hi = v.surv_tau + half;
  for (std::size_t j = 0; j < effective.size(); ++j) {
    if (j == index_of(v.id)) continue;
    // Solve lerp(c, surv, w) = u_j for the clamped report c.
    const double c = (effective[j] - p.w * v.surv_tau) / (1.0 - p.w);
    if (c < lo || c > hi) continue;
    const double d = c - v.tau;
    for (double cand : {d - kBreakpointOffset, d, d + kBreakpointOffset})
      if (std::abs(cand) <= v.epsilon) out.push_back(cand);
  }
}

// Orders candidates by preference for tie-breaking: smaller |delta| first,
// then smaller delta. Removes exact duplicates.
inline void sort_by_preference(std::vector<double>& c) {
  std::sort(c.begin(), c.end(), [](double a, double b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
    return a < b;
  });
  c.erase(std::unique(c.begin(), c.end()), c.end());
}

inline double true_cost(const Schedule& s, const Scenario& sc) {
  return schedule_cost(s, sc.true_etas()).total;
}

inline void require_untrusted(const Scenario& s, int id) {
  if (id < 1 || static_cast<std::size_t>(id) > s.size())
    throw ValidationError("vehicle id " + std::to_string(id) + " out of range");
  if (!s.vehicle(id).untrusted) throw ValidationError("vehicle " + std::to_string(id) + " is not untrusted");
}

}  // namespace detail

/// Own cost of vehicle `id` when it reports tau_id + delta and everyone
/// else reports according to `others`.
inline double own_cost_at(const Scenario& s, const RuleParams& p, int id, const DeviationVector& others,
                          double delta) {
  ReportVector r;
  r.tau_hat.resize(s.size());
  for (const auto& v : s.vehicles) r.tau_hat[detail::index_of(v.id)] = v.tau + others[v.id];
  r.tau_hat[detail::index_of(id)] = s.vehicle(id).tau + delta;
  const Schedule sch = apply_rule(r, s, p);
  const double d = sch.time_of(id) - s.vehicle(id).tau;
  return d * d;
}

/// Self-interested best response of untrusted vehicle `id`.
/// `others[id]` is ignored.
inline BestResponseResult best_response(const Scenario& s, const RuleParams& p, int id,
                                        const DeviationVector& others, int grid_points = 201) {
  detail::require_untrusted(s, id);
  if (grid_points < 2) throw ValidationError("best_response: grid_points must be >= 2");
  if (others.delta.size() != s.size()) throw ValidationError("best_response: deviation vector size mismatch");
  const Vehicle& me = s.vehicle(id);

  std::vector<double> cands = detail::deviation_grid(me.epsilon, grid_points);
  {
    ReportVector r;
    r.tau_hat.resize(s.size());
    for (const auto& v : s.vehicles) r.tau_hat[detail::index_of(v.id)] = v.tau + others[v.id];
    detail::append_breakpoints(cands, me, p, effective_etas(r, s, p));
  }
  detail::sort_by_preference(cands);

  std::vector<double> costs(cands.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < cands.size(); ++k) {
    costs[k] = own_cost_at(s, p, id, others, cands[k]);
    best = std::min(best, costs[k]);
  }
  BestResponseResult out;
  out.grid_resolution = me.epsilon == 0.0 ? 0.0 : 2.0 * me.epsilon / static_cast<double>(grid_points - 1);
  out.candidates_evaluated = static_cast<int>(cands.size());
  for (std::size_t k = 0; k < cands.size(); ++k) {
    if (costs[k] <= best + kCostTieTol) {
      out.delta_star = cands[k];
      out.own_cost = costs[k];
      break;
    }
  }
  return out;
}

/// Gauss-Seidel best-response sweeps over the untrusted set, in ascending
/// id order, starting from truthful reports. `iterations` counts sweeps,
/// including the final one that confirms no change.
inline FixedPointResult iterated_best_response(const Scenario& s, const RuleParams& p,
                                               const BestResponseConfig& cfg = {}) {
  if (cfg.max_iters < 1) throw ValidationError("iterated_best_response: max_iters must be >= 1");
  if (!(cfg.tol > 0.0)) throw ValidationError("iterated_best_response: tol must be > 0");
  FixedPointResult out;
  out.deltas = DeviationVector::zeros(s.size());
  const std::vector<int> movers = s.untrusted_ids();
  for (int sweep = 1; sweep <= cfg.max_iters; ++sweep) {
    out.iterations = sweep;
    double change = 0.0;
    for (int id : movers) {
      const double next = best_response(s, p, id, out.deltas, cfg.grid_points).delta_star;
      change = std::max(change, std::abs(next - out.deltas[id]));
      out.deltas[id] = next;
    }
    if (change <= cfg.tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

/// True system cost of the schedule the rule produces from tau + delta.
inline double system_cost_under(const Scenario& s, const RuleParams& p, const DeviationVector& d) {
  ReportVector r;
  r.tau_hat.resize(s.size());
  for (const auto& v : s.vehicles) r.tau_hat[detail::index_of(v.id)] = v.tau + d[v.id];
  return detail::true_cost(apply_rule(r, s, p), s);
}

/// Malicious worst case: maximize true system cost over the box of
/// admissible deviations of the untrusted set. Product grid (which always
/// contains every box vertex and delta = 0) followed by coordinate ascent
/// on a 10x finer local grid plus order breakpoints. The result is a lower
/// bound on the true maximum.
inline AttackResult worst_case_deviation(const Scenario& s, const RuleParams& p, const AttackConfig& cfg = {}) {
  if (cfg.grid_points_per_dim < 3) throw ValidationError("worst_case_deviation: grid_points_per_dim must be >= 3");
  if (cfg.refine_iters < 0) throw ValidationError("worst_case_deviation: refine_iters must be >= 0");

  const std::vector<int> m = s.untrusted_ids();
  AttackResult best;
  best.deltas = DeviationVector::zeros(s.size());
  best.worst_cost = system_cost_under(s, p, best.deltas);
  best.candidates_evaluated = 1;
  if (m.empty()) return best;

  // Candidate preference for equal cost: smaller L1 norm, then lexicographically smaller.
  auto better = [&](double cost, const DeviationVector& d) {
    if (cost > best.worst_cost + kCostTieTol) return true;
    if (cost < best.worst_cost - kCostTieTol) return false;
    double l1_new = 0.0, l1_old = 0.0;
    for (int id : m) {
      l1_new += std::abs(d[id]);
      l1_old += std::abs(best.deltas[id]);
    }
    if (l1_new != l1_old) return l1_new < l1_old;
    return d.delta < best.deltas.delta;
  };
  auto consider = [&](const DeviationVector& d) {
    const double c = system_cost_under(s, p, d);
    ++best.candidates_evaluated;
    if (better(c, d)) {
      best.deltas = d;
      best.worst_cost = c;
    }
  };

  // Largest odd per-dimension count within the cell budget.
  int points = cfg.grid_points_per_dim;
  auto cells = [&](int k) {
    double c = 1.0;
    for (std::size_t i = 0; i < m.size(); ++i) c *= k;
    return c;
  };
  while (points > 3 && cells(points) > static_cast<double>(cfg.max_grid_cells)) points -= (points % 2 == 0) ? 1 : 2;

  if (cells(points) <= static_cast<double>(cfg.max_grid_cells)) {
    std::vector<std::vector<double>> axes;
    for (int id : m) {
      auto g = detail::deviation_grid(s.vehicle(id).epsilon, points);
      std::sort(g.begin(), g.end());
      g.erase(std::unique(g.begin(), g.end()), g.end());
      axes.push_back(std::move(g));
    }
    std::vector<std::size_t> pos(m.size(), 0);
    DeviationVector d = DeviationVector::zeros(s.size());
    while (true) {
      for (std::size_t k = 0; k < m.size(); ++k) d[m[k]] = axes[k][pos[k]];
      consider(d);
      std::size_t k = 0;
      while (k < m.size() && ++pos[k] == axes[k].size()) pos[k++] = 0;
      if (k == m.size()) break;
    }
  } else {
    DeviationVector lo = DeviationVector::zeros(s.size()), hi = lo;
    for (int id : m) {
      lo[id] = -s.vehicle(id).epsilon;
      hi[id] = s.vehicle(id).epsilon;
    }
    consider(lo);
    consider(hi);
  }

  // Coordinate ascent.
  for (int round = 0; round < cfg.refine_iters; ++round) {
    for (int id : m) {
      const Vehicle& v = s.vehicle(id);
      if (v.epsilon == 0.0) continue;
      const double coarse = 2.0 * v.epsilon / static_cast<double>(points - 1);
      const double fine = coarse / 10.0;
      std::vector<double> local;
      for (int k = -10; k <= 10; ++k) {
        const double c = best.deltas[id] + fine * k;
        if (std::abs(c) <= v.epsilon) local.push_back(c);
      }
      {
        ReportVector r;
        r.tau_hat.resize(s.size());
        for (const auto& u : s.vehicles) r.tau_hat[detail::index_of(u.id)] = u.tau + best.deltas[u.id];
        detail::append_breakpoints(local, v, p, effective_etas(r, s, p));
      }
      std::sort(local.begin(), local.end());
      local.erase(std::unique(local.begin(), local.end()), local.end());
      DeviationVector d = best.deltas;
      for (double c : local) {
        d[id] = c;
        consider(d);
      }
    }
  }
  return best;
}

}  // namespace seqshield
