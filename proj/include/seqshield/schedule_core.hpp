#pragma once

// Separation-constrained arrival scheduling with squared adjustment cost.
//
// For a fixed landing order with reference ETAs t_0..t_{N-1},
//   min sum_k (a_k - t_k)^2  s.t.  a_{k+1} - a_k >= s_min
// becomes plain isotonic regression under b_k = a_k - k*s_min on
// z_k = t_k - k*s_min, which pool-adjacent-violators solves exactly.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "seqshield/errors.hpp"

namespace seqshield {

inline constexpr double kFeasibilityTol = 1e-9;

struct Schedule {
  std::vector<int> order;     // order[k] = id of the k-th landing
  std::vector<double> times;  // times[id-1] = assigned arrival time
  double objective = 0.0;     // sum of squared deviations from the reference used to build it

  double time_of(int id) const { return times.at(static_cast<std::size_t>(id - 1)); }
};

/// Nondecreasing least-squares fit of `z` (unit weights). Each pooled
/// block takes the mean of its members.
inline std::vector<double> isotonic_fit(std::span<const double> z) {
  struct Block {
    double sum;
    std::size_t count;
    double mean() const { return sum / static_cast<double>(count); }
  };
  std::vector<Block> stack;
  stack.reserve(z.size());
  for (double v : z) {
    stack.push_back({v, 1});
    while (stack.size() > 1 && stack[stack.size() - 2].mean() > stack.back().mean()) {
      Block top = stack.back();
      stack.pop_back();
      stack.back().sum += top.sum;
      stack.back().count += top.count;
    }
  }
  std::vector<double> fit;
  fit.reserve(z.size());
  for (const auto& b : stack) fit.insert(fit.end(), b.count, b.mean());
  return fit;
}

/// Optimal times for a fixed landing order. `ref_etas_in_order[k]` is the
/// reference ETA of the k-th lander.
inline std::vector<double> assign_times(std::span<const double> ref_etas_in_order, double s_min) {
  if (ref_etas_in_order.empty()) throw ValidationError("assign_times: empty input");
  if (!(s_min >= 0.0)) throw ValidationError("assign_times: s_min must be >= 0");
  const std::size_t n = ref_etas_in_order.size();
  std::vector<double> z(n);
  for (std::size_t k = 0; k < n; ++k) z[k] = ref_etas_in_order[k] - static_cast<double>(k) * s_min;
  std::vector<double> a = isotonic_fit(z);
  for (std::size_t k = 0; k < n; ++k) a[k] += static_cast<double>(k) * s_min;
  return a;
}

namespace detail {

inline double squared_error(std::span<const double> times, std::span<const double> ref) {
  double total = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double d = times[i] - ref[i];
    total += d * d;
  }
  return total;
}

inline Schedule schedule_for_order(std::span<const double> ref_etas, std::vector<int> order, double s_min) {
  std::vector<double> in_order(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) in_order[k] = ref_etas[static_cast<std::size_t>(order[k] - 1)];
  const std::vector<double> a = assign_times(in_order, s_min);
  Schedule s;
  s.times.resize(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) s.times[static_cast<std::size_t>(order[k] - 1)] = a[k];
  s.order = std::move(order);
  s.objective = squared_error(s.times, ref_etas);
  return s;
}

}  // namespace detail

/// Lands vehicles in ascending reference-ETA order (ties by ascending id)
/// and assigns optimal separated times. `ref_etas[i]` belongs to id i+1.
inline Schedule solve_schedule(std::span<const double> ref_etas, double s_min) {
  if (ref_etas.empty()) throw ValidationError("solve_schedule: empty input");
  std::vector<int> order(ref_etas.size());
  std::iota(order.begin(), order.end(), 1);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return ref_etas[static_cast<std::size_t>(a - 1)] < ref_etas[static_cast<std::size_t>(b - 1)];
  });
  return detail::schedule_for_order(ref_etas, std::move(order), s_min);
}

inline constexpr std::size_t kBruteForceMaxVehicles = 8;

/// Exhaustive search over all N! landing orders. Ties keep the
/// lexicographically smallest order.
inline Schedule brute_force_schedule(std::span<const double> ref_etas, double s_min) {
  if (ref_etas.empty()) throw ValidationError("brute_force_schedule: empty input");
  if (ref_etas.size() > kBruteForceMaxVehicles)
    throw ValidationError("brute_force_schedule: N > " + std::to_string(kBruteForceMaxVehicles));
  std::vector<int> order(ref_etas.size());
  std::iota(order.begin(), order.end(), 1);
  Schedule best;
  bool have = false;
  do {
    Schedule cand = detail::schedule_for_order(ref_etas, order, s_min);
    if (!have || cand.objective < best.objective) {
      best = std::move(cand);
      have = true;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return best;
}

struct ScheduleCost {
  double total = 0.0;
  std::vector<double> per_vehicle;
};

/// Squared adjustment cost of each vehicle against `reference_etas`
/// (true ETAs for the true cost, reports for the reported cost).
inline ScheduleCost schedule_cost(const Schedule& schedule, std::span<const double> reference_etas) {
  if (schedule.times.size() != reference_etas.size())
    throw ValidationError("schedule_cost: length mismatch (" + std::to_string(schedule.times.size()) + " vs " +
                          std::to_string(reference_etas.size()) + ")");
  ScheduleCost c;
  c.per_vehicle.resize(reference_etas.size());
  for (std::size_t i = 0; i < reference_etas.size(); ++i) {
    const double d = schedule.times[i] - reference_etas[i];
    c.per_vehicle[i] = d * d;
    c.total += c.per_vehicle[i];
  }
  return c;
}

/// True iff consecutive landings are at least s_min - tol apart.
inline bool is_separation_feasible(const Schedule& s, double s_min, double tol = kFeasibilityTol) {
  for (std::size_t k = 0; k + 1 < s.order.size(); ++k)
    if (s.time_of(s.order[k + 1]) - s.time_of(s.order[k]) < s_min - tol) return false;
  return true;
}

}  // namespace seqshield
