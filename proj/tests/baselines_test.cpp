#include <gtest/gtest.h>

#include <vector>

#include "udsdm/baselines.hpp"
#include "udsdm/rng.hpp"

using namespace udsdm;

TEST(Bm, ShipsOnAnyChange) {
  EXPECT_TRUE(bm_decide({1e-12, 1}));
  EXPECT_FALSE(bm_decide({0.0, 1}));
}

TEST(Holt, HandRolledRecursion) {
  HoltState s(0.5, 0.5);
  s = holt_update(s, 1.0);
  s = holt_update(s, 2.0);
  EXPECT_DOUBLE_EQ(s.level, 1.0);
  EXPECT_DOUBLE_EQ(s.trend, 1.0);
  s = holt_update(s, 3.0);
  EXPECT_DOUBLE_EQ(s.level, 2.5);
  EXPECT_DOUBLE_EQ(s.trend, 1.25);
  EXPECT_DOUBLE_EQ(s.forecast(), 3.75);
}

TEST(Holt, MatchesIndependentRecursionOnRandomSeries) {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const double a = rng.uniform(0.05, 0.95), b = rng.uniform(0.05, 0.95);
    std::vector<double> xs(30);
    for (auto& x : xs) x = rng.uniform();
    HoltState s(a, b);
    for (double x : xs) s = holt_update(s, x);
    double level = xs[0], trend = xs[1] - xs[0];
    for (std::size_t t = 2; t < xs.size(); ++t) {
      const double prev = level;
      level = a * xs[t] + (1 - a) * (level + trend);
      trend = b * (level - prev) + (1 - b) * trend;
    }
    EXPECT_NEAR(s.level, level, 1e-12);
    EXPECT_NEAR(s.trend, trend, 1e-12);
  }
}

TEST(Holt, RejectsSmoothingOutsideOpenInterval) {
  EXPECT_THROW(HoltState(0.0, 0.5), std::invalid_argument);
  EXPECT_THROW(HoltState(0.5, 1.0), std::invalid_argument);
}

TEST(Holt, ResetForgetsEverything) {
  HoltState s(0.5, 0.5);
  s = holt_update(s, 0.4);
  s = holt_update(s, 0.9);
  s.reset();
  EXPECT_EQ(s.observations_seen, 0u);
  EXPECT_FALSE(s.forecast_ready());
}

TEST(Pm, ForecastAboveThresholdShips) {
  HoltState s(0.5, 0.5);
  s.level = 0.7;
  s.trend = 0.1;
  s.observations_seen = 10;
  EXPECT_TRUE(pm_decide(s, 0.75, 10));
}

TEST(Pm, ForecastBelowThresholdHolds) {
  HoltState s(0.5, 0.5);
  s.level = 0.5;
  s.trend = 0.0;
  s.observations_seen = 10;
  EXPECT_FALSE(pm_decide(s, 0.6, 10));
}

TEST(Pm, WaitsForWarmUpWindow) {
  HoltState s(0.5, 0.5);
  for (int k = 0; k < 9; ++k) s = holt_update(s, 1.0);
  EXPECT_GT(s.forecast(), 0.6);
  EXPECT_FALSE(pm_decide(s, 0.6, 10));
  s = holt_update(s, 1.0);
  EXPECT_TRUE(pm_decide(s, 0.6, 10));
}

TEST(Pm, StrictInequality) {
  HoltState s(0.5, 0.5);
  s.level = 0.6;
  s.trend = 0.0;
  s.observations_seen = 10;
  EXPECT_FALSE(pm_decide(s, 0.6, 10));
}
