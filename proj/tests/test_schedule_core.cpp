#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "seqshield/schedule_core.hpp"

using namespace seqshield;

namespace {

void expect_times(const std::vector<double>& got, const std::vector<double>& want, double tol = 1e-12) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], tol) << "index " << i;
}

}  // namespace

TEST(AssignTimes, SlackConstraintsLeaveReferencesUntouched) {
  expect_times(assign_times(std::vector<double>{0, 10}, 2.0), {0, 10});
}

TEST(AssignTimes, ActivePairSplitsSymmetrically) {
  const std::vector<double> t{0, 1};
  const auto a = assign_times(t, 2.0);
  expect_times(a, {-0.5, 1.5});
  const auto qp = oracle::fixed_order_qp(t, 2.0);
  expect_times(a, qp.times);
  EXPECT_NEAR(qp.cost, 0.5, 1e-12);
}

TEST(AssignTimes, ThreeVehiclePool) {
  const std::vector<double> t{0, 1, 2};
  expect_times(assign_times(t, 2.0), {-1, 1, 3});
  EXPECT_NEAR(oracle::fixed_order_qp(t, 2.0).cost, 2.0, 1e-12);
}

TEST(AssignTimes, RejectsEmptyInput) {
  EXPECT_THROW(assign_times(std::vector<double>{}, 1.0), ValidationError);
  EXPECT_THROW(assign_times(std::vector<double>{1.0}, -1.0), ValidationError);
}

TEST(AssignTimes, MatchesActiveSetOracle) {
  oracle::InstanceGen g(3);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = static_cast<std::size_t>(g.integer(1, 9));
    const double s_min = g.uniform(0.0, 3.0);
    const std::vector<double> t = g.etas(n, g.uniform(0.5, 20.0));
    const auto a = assign_times(t, s_min);
    const auto qp = oracle::fixed_order_qp(t, s_min);
    expect_times(a, qp.times, 1e-9);
  }
}

// Pool structure: the fitted b = a - k*s is nondecreasing, residuals sum to
// zero on every maximal constant block, and blocks are strictly separated.
TEST(AssignTimes, PoolStructureOnRandomInstances) {
  oracle::InstanceGen g(5);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = static_cast<std::size_t>(g.integer(1, 50));
    const double s_min = g.uniform(0.0, 3.0);
    const std::vector<double> t = g.etas(n, g.uniform(1.0, 100.0));
    const auto a = assign_times(t, s_min);
    std::vector<double> z(n);
    for (std::size_t k = 0; k < n; ++k) z[k] = t[k] - static_cast<double>(k) * s_min;
    const auto b = isotonic_fit(z);
    ASSERT_EQ(b.size(), n);
    std::size_t start = 0;
    for (std::size_t k = 0; k <= n; ++k) {
      if (k < n) {
        EXPECT_NEAR(a[k], b[k] + static_cast<double>(k) * s_min, 1e-9);
        if (k > 0) {
          EXPECT_GE(a[k] - a[k - 1], s_min - 1e-9);
          EXPECT_GE(b[k], b[k - 1]);
        }
      }
      if (k > 0 && (k == n || b[k] != b[start])) {
        double resid = 0.0;
        for (std::size_t j = start; j < k; ++j) resid += z[j] - b[j];
        EXPECT_NEAR(resid, 0.0, 1e-9);
        if (k < n) {
          EXPECT_GT(b[k], b[start]);
        }
        start = k;
      }
    }
  }
}

TEST(SolveSchedule, PermutedPairLandsEarlierReportFirst) {
  const Schedule s = solve_schedule(std::vector<double>{1.0, 0.0}, 2.0);
  EXPECT_EQ(s.order, (std::vector<int>{2, 1}));
  EXPECT_NEAR(s.time_of(2), -0.5, 1e-12);
  EXPECT_NEAR(s.time_of(1), 1.5, 1e-12);
  EXPECT_NEAR(s.objective, 0.5, 1e-12);
}

TEST(SolveSchedule, SingleVehicleKeepsItsEta) {
  for (double s_min : {0.0, 2.0, 50.0}) {
    const Schedule s = solve_schedule(std::vector<double>{5.0}, s_min);
    EXPECT_EQ(s.order, std::vector<int>{1});
    EXPECT_EQ(s.times, std::vector<double>{5.0});
    EXPECT_EQ(s.objective, 0.0);
  }
}

TEST(SolveSchedule, ReferenceInstance) {
  const std::vector<double> tau{0, 1, 1.1};
  const Schedule s = solve_schedule(tau, 2.0);
  EXPECT_EQ(s.order, (std::vector<int>{1, 2, 3}));
  expect_times(s.times, {-1.3, 0.7, 2.7}, 1e-12);
  EXPECT_NEAR(s.objective, 4.34, 1e-12);
  EXPECT_NEAR(oracle::global_qp_cost(tau, 2.0), 4.34, 1e-12);
  EXPECT_TRUE(is_separation_feasible(s, 2.0));
}

TEST(SolveSchedule, TiesBreakByAscendingId) {
  const Schedule s = solve_schedule(std::vector<double>{3.0, 3.0, 1.0}, 2.0);
  EXPECT_EQ(s.order, (std::vector<int>{3, 1, 2}));
}

TEST(SolveSchedule, RejectsEmptyInput) { EXPECT_THROW(solve_schedule(std::vector<double>{}, 1.0), ValidationError); }

TEST(BruteForceSchedule, AgreesOnReferenceInstance) {
  const Schedule b = brute_force_schedule(std::vector<double>{0, 1, 1.1}, 2.0);
  EXPECT_NEAR(b.objective, 4.34, 1e-12);
  EXPECT_EQ(b.order, (std::vector<int>{1, 2, 3}));
}

TEST(BruteForceSchedule, SingleVehicle) {
  const Schedule b = brute_force_schedule(std::vector<double>{7.0}, 0.0);
  EXPECT_EQ(b.order, std::vector<int>{1});
  EXPECT_EQ(b.times, std::vector<double>{7.0});
}

TEST(BruteForceSchedule, EqualEtasSplitSymmetrically) {
  const Schedule b = brute_force_schedule(std::vector<double>{3, 3}, 2.0);
  EXPECT_EQ(b.order, (std::vector<int>{1, 2}));
  EXPECT_NEAR(b.time_of(1), 2.0, 1e-12);
  EXPECT_NEAR(b.time_of(2), 4.0, 1e-12);
  EXPECT_NEAR(b.objective, 2.0, 1e-12);
}

TEST(BruteForceSchedule, RejectsLargeInstances) {
  EXPECT_THROW(brute_force_schedule(std::vector<double>(9, 0.0), 1.0), ValidationError);
}

TEST(SolveSchedule, SortedOrderIsGloballyOptimal) {
  oracle::InstanceGen g(17);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = static_cast<std::size_t>(g.integer(1, 6));
    const double s_min = g.uniform(0.0, 3.0);
    const auto t = g.etas(n, g.uniform(0.5, 12.0));
    const double sorted = solve_schedule(t, s_min).objective;
    EXPECT_NEAR(sorted, brute_force_schedule(t, s_min).objective, 1e-9);
    if (n <= 5) {
      EXPECT_NEAR(sorted, oracle::global_qp_cost(t, s_min), 1e-9);
    }
  }
}

TEST(SolveSchedule, TranslationEquivariance) {
  oracle::InstanceGen g(23);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = static_cast<std::size_t>(g.integer(1, 10));
    const double s_min = g.uniform(0.0, 3.0);
    const auto t = g.etas(n, 10.0);
    const double c = g.uniform(-50.0, 50.0);
    std::vector<double> shifted(t);
    for (auto& x : shifted) x += c;
    const Schedule a = solve_schedule(t, s_min);
    const Schedule b = solve_schedule(shifted, s_min);
    EXPECT_EQ(a.order, b.order);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(b.times[i], a.times[i] + c, 1e-9);
    EXPECT_NEAR(a.objective, b.objective, 1e-9);
  }
}

TEST(SolveSchedule, CostNondecreasingInSeparation) {
  oracle::InstanceGen g(29);
  for (int trial = 0; trial < 200; ++trial) {
    const auto t = g.etas(static_cast<std::size_t>(g.integer(2, 12)), 15.0);
    double prev = -1.0;
    for (double s_min = 0.0; s_min <= 4.0; s_min += 0.25) {
      const double c = solve_schedule(t, s_min).objective;
      EXPECT_GE(c, prev - 1e-12);
      prev = c;
    }
  }
}

TEST(ScheduleCost, PerVehicleAndTotal) {
  Schedule s;
  s.order = {1, 2, 3};
  s.times = {-1.3, 0.7, 2.7};
  const ScheduleCost c = schedule_cost(s, std::vector<double>{0, 1, 1.1});
  ASSERT_EQ(c.per_vehicle.size(), 3u);
  EXPECT_NEAR(c.per_vehicle[0], 1.69, 1e-12);
  EXPECT_NEAR(c.per_vehicle[1], 0.09, 1e-12);
  EXPECT_NEAR(c.per_vehicle[2], 2.56, 1e-12);
  EXPECT_NEAR(c.total, 4.34, 1e-12);

  EXPECT_EQ(schedule_cost(s, s.times).total, 0.0);

  Schedule sym;
  sym.order = {1, 2};
  sym.times = {0, 2};
  const ScheduleCost cs = schedule_cost(sym, std::vector<double>{1, 1});
  EXPECT_EQ(cs.per_vehicle, (std::vector<double>{1, 1}));
  EXPECT_EQ(cs.total, 2.0);

  EXPECT_THROW(schedule_cost(sym, std::vector<double>{1}), ValidationError);
}
