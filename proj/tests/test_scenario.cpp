#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "seqshield/scenario.hpp"

using namespace seqshield;

TEST(GenerateScenario, ZeroNoiseHasExactSurveillanceAndOneUntrusted) {
  const Scenario s = generate_scenario(3, 10.0, 2.0, 0.0, 0.5, 1, 42);
  ASSERT_EQ(s.size(), 3u);
  int untrusted = 0;
  for (const auto& v : s.vehicles) {
    EXPECT_EQ(v.surv_tau, v.tau);
    EXPECT_EQ(v.epsilon, 0.5);
    untrusted += v.untrusted;
  }
  EXPECT_EQ(untrusted, 1);
  EXPECT_NO_THROW(validate(s));
}

TEST(GenerateScenario, DeterministicForEqualSeed) {
  EXPECT_EQ(generate_scenario(3, 10.0, 2.0, 0.0, 0.5, 1, 42), generate_scenario(3, 10.0, 2.0, 0.0, 0.5, 1, 42));
  EXPECT_EQ(generate_scenario(9, 30.0, 1.5, 0.2, 0.4, 4, 7), generate_scenario(9, 30.0, 1.5, 0.2, 0.4, 4, 7));
  EXPECT_NE(generate_scenario(9, 30.0, 1.5, 0.2, 0.4, 4, 7), generate_scenario(9, 30.0, 1.5, 0.2, 0.4, 4, 8));
}

TEST(GenerateScenario, RejectsBadArguments) {
  EXPECT_THROW(generate_scenario(0, 10.0, 2.0, 0.0, 0.5, 0, 1), ValidationError);
  EXPECT_THROW(generate_scenario(3, 10.0, 2.0, 0.6, 0.5, 1, 1), ValidationError);
  EXPECT_THROW(generate_scenario(3, 10.0, 2.0, 0.1, 0.5, 4, 1), ValidationError);
  EXPECT_THROW(generate_scenario(3, 0.0, 2.0, 0.1, 0.5, 1, 1), ValidationError);
}

TEST(GenerateScenario, PropertiesHoldAcrossSeeds) {
  oracle::InstanceGen g(11);
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const std::size_t n = static_cast<std::size_t>(g.integer(1, 12));
    const double eps = g.uniform(0.0, 2.0);
    const double sigma = g.uniform(0.0, eps);
    const std::size_t m = static_cast<std::size_t>(g.integer(0, static_cast<int>(n)));
    const Scenario s = generate_scenario(n, 25.0, 2.0, sigma, eps, m, seed);
    std::size_t untrusted = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Vehicle& v = s.vehicles[i];
      EXPECT_EQ(v.id, static_cast<int>(i + 1));
      EXPECT_LE(std::abs(v.surv_tau - v.tau), sigma + kSurveillanceSlack);
      EXPECT_GE(v.tau, 0.0);
      EXPECT_LE(v.tau, 25.0);
      if (i > 0) {
        EXPECT_LE(s.vehicles[i - 1].tau, v.tau);  // relabelled by ascending ETA
      }
      untrusted += v.untrusted;
    }
    EXPECT_EQ(untrusted, m);
    // Serialization round trip.
    EXPECT_EQ(load_scenario(serialize_scenario(s)), s);
  }
}

TEST(LoadScenario, ParsesTwoVehicleFile) {
  const Scenario s = load_scenario(R"({"s_min": 2, "sigma": 0.1, "seed": 5, "vehicles": [
      {"id": 2, "tau": 3.0, "surv_tau": 3.05, "epsilon": 0.2, "untrusted": true},
      {"id": 1, "tau": 1.0, "surv_tau": 1.0, "epsilon": 0.2, "untrusted": false}]})");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.vehicle(1).tau, 1.0);
  EXPECT_EQ(s.vehicle(2).surv_tau, 3.05);
  EXPECT_TRUE(s.vehicle(2).untrusted);
  EXPECT_EQ(s.seed, 5u);
}

TEST(LoadScenario, RejectsInvalidFiles) {
  EXPECT_THROW(load_scenario(R"({"s_min": 2, "vehicles": [{"id": 1, "tau": 0}, {"id": 1, "tau": 1}]})"),
               ValidationError);
  EXPECT_THROW(load_scenario(R"({"s_min": 2, "vehicles": [{"id": 1, "tau": 0, "epsilon": -0.1}]})"),
               ValidationError);
  EXPECT_THROW(load_scenario(R"({"s_min": 2, "sigma": 0.3, "vehicles": [
      {"id": 1, "tau": 0, "epsilon": 0.2, "untrusted": true}]})"),
               ValidationError);
  EXPECT_THROW(load_scenario(R"({"s_min": 2, "vehicles": [{"id": 1, "tau": 0}, {"id": 3, "tau": 1}]})"),
               ValidationError);
  EXPECT_THROW(load_scenario("{not json"), ParseError);
  EXPECT_THROW(load_scenario(R"({"vehicles": []})"), ParseError);
  EXPECT_THROW(load_scenario(R"({"s_min": 2, "vehicles": [{"id": "x", "tau": 0}]})"), ParseError);
}

TEST(ApplyDeviation, TruthfulIsIdentity) {
  Scenario s;
  s.s_min = 1.0;
  s.vehicles = {{1, 0.0, 0.0, 0.5, false}, {2, 1.0, 1.0, 0.5, false}};
  EXPECT_EQ(apply_deviation(s, DeviationVector{{0.0, 0.0}}).tau_hat, (std::vector<double>{0.0, 1.0}));
}

TEST(ApplyDeviation, NegativeDeviationClaimsEarlierArrival) {
  const Scenario s = oracle::reference_scenario();
  const ReportVector r = apply_deviation(s, DeviationVector{{0.0, 0.0, -0.2}});
  EXPECT_EQ(r.tau_hat[0], 0.0);
  EXPECT_EQ(r.tau_hat[1], 1.0);
  EXPECT_EQ(r.tau_hat[2], 1.1 + -0.2);
  EXPECT_NEAR(r.tau_hat[2], 0.9, 1e-15);
}

TEST(ApplyDeviation, RejectsDeviationOutsideUncertaintySet) {
  Scenario s;
  s.s_min = 1.0;
  s.vehicles = {{1, 0.0, 0.0, 0.5, true}, {2, 1.0, 1.0, 0.5, false}};
  EXPECT_THROW(apply_deviation(s, DeviationVector{{0.6, 0.0}}), ValidationError);
  EXPECT_THROW(apply_deviation(s, DeviationVector{{0.0, 0.1}}), ValidationError);  // trusted
  EXPECT_THROW(apply_deviation(s, DeviationVector{{0.0}}), ValidationError);
  EXPECT_NO_THROW(apply_deviation(s, DeviationVector{{0.5, 0.0}}));
}
