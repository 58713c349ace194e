#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "udsdm/decision.hpp"
#include "udsdm/rng.hpp"

using namespace udsdm;

namespace {

// Zero-parameter forecaster with a fixed readout bias: forecasts are that
// bias three times.
UdsdmModel constant_forecast_model(double forecast) {
  LstmCell cell(2);
  cell.readout_bias() = forecast;
  return {cell, FuzzySystem(), NormalizationCalibration{0.0, 1.0}};
}

QuantaSeries series(std::vector<double> values, std::int64_t first_step = 1) {
  QuantaSeries q;
  for (std::size_t k = 0; k < values.size(); ++k) q.push({values[k], first_step + static_cast<std::int64_t>(k)});
  return q;
}

}  // namespace

TEST(Fuse, GeometricMeanExample) {
  EXPECT_NEAR(fuse(0.9, 0.7), 0.7937253933193772, 1e-15);
  EXPECT_GT(fuse(0.9, 0.7), 0.75);
}

TEST(Fuse, ZeroAnnihilates) {
  EXPECT_EQ(fuse(0.0, 0.8), 0.0);
  EXPECT_EQ(fuse(0.8, 0.0), 0.0);
}

TEST(Fuse, RejectsOutOfRange) {
  EXPECT_THROW(fuse(1.2, 0.5), std::invalid_argument);
  EXPECT_THROW(fuse(0.5, -0.1), std::invalid_argument);
  EXPECT_THROW(fuse(NAN, 0.5), std::invalid_argument);
}

TEST(Fuse, GridProperties) {
  for (int i = 0; i <= 100; ++i) {
    const double a = i / 100.0;
    EXPECT_EQ(fuse(0.0, a), 0.0);
    EXPECT_NEAR(fuse(a, a), a, 1e-12);
    for (int j = 0; j <= 100; ++j) {
      const double b = j / 100.0;
      const double g = fuse(a, b);
      EXPECT_GE(g, std::min(a, b) - 1e-12);
      EXPECT_LE(g, std::max(a, b) + 1e-12);
      EXPECT_EQ(g, fuse(b, a));
    }
  }
}

TEST(PhaseOffset, StaggersNodesAcrossTheEpoch) {
  EXPECT_EQ(phase_offset_for(0, 2, 100), 0);
  EXPECT_EQ(phase_offset_for(1, 2, 100), 50);
  EXPECT_EQ(phase_offset_for(5, 6, 100), 83);
}

TEST(EpochClock, FirstDeadlineFollowsOffset) {
  EXPECT_EQ(EpochClock(100, 0).deadline(), 100);
  EXPECT_EQ(EpochClock(100, 30).deadline(), 30);
  EXPECT_FALSE(EpochClock(100, 30).due(29));
  EXPECT_TRUE(EpochClock(100, 30).due(30));
}

TEST(EpochClock, DisseminationOpensAFreshEpoch) {
  EpochClock c(100, 0);
  c.on_dissemination(40);
  EXPECT_EQ(c.last_dissemination(), 40);
  EXPECT_EQ(c.deadline(), 140);
  EXPECT_FALSE(c.due(139));
  EXPECT_TRUE(c.due(140));
}

TEST(DecisionPolicy, Validates) {
  EXPECT_THROW((DecisionPolicy{0.0, 100, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((DecisionPolicy{0.6, 0, 0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((DecisionPolicy{1.0, 1, 0}.validate()));
}

TEST(Decide, WarmUpHoldsWithoutTriple) {
  const auto model = constant_forecast_model(1.0);
  const DecisionPolicy p{0.1, 100, 0};
  const EpochClock clock(100, 0);
  const auto tr = decide(p, clock, 2, series({1.0, 1.0}), model);
  EXPECT_EQ(tr.decision, Decision::hold);
  EXPECT_FALSE(tr.fused.has_value());
}

TEST(Decide, HighQuantaAndForecastDisseminate) {
  const auto model = constant_forecast_model(1.0);
  const DecisionPolicy p{0.75, 100, 0};
  const auto tr = decide(p, EpochClock(100, 0), 3, series({1.0, 1.0, 1.0}), model);
  ASSERT_TRUE(tr.fused.has_value());
  EXPECT_NEAR(*tr.dod_p, 0.8, 1e-12);
  EXPECT_NEAR(*tr.dod_f, 0.8, 1e-12);
  EXPECT_NEAR(*tr.fused, std::sqrt(*tr.dod_p * *tr.dod_f), 1e-12);
  EXPECT_EQ(tr.decision, Decision::disseminate);
}

TEST(Decide, DeadlineForcesWhenGateStaysShut) {
  const auto model = constant_forecast_model(0.0);
  const DecisionPolicy p{0.6, 100, 0};
  const auto tr = decide(p, EpochClock(100, 0), 100, series({0.0, 0.0, 0.0}, 98), model);
  ASSERT_TRUE(tr.fused.has_value());
  EXPECT_LT(*tr.fused, 0.6);
  EXPECT_EQ(tr.decision, Decision::forced);
}

TEST(Decide, TieHolds) {
  const auto model = constant_forecast_model(1.0);
  const auto probe = decide({0.5, 100, 0}, EpochClock(100, 0), 3, series({0.6, 0.7, 0.65}), model);
  ASSERT_TRUE(probe.fused.has_value());
  const auto tie = decide({*probe.fused, 100, 0}, EpochClock(100, 0), 3, series({0.6, 0.7, 0.65}), model);
  EXPECT_EQ(tie.decision, Decision::hold);
}

TEST(Decide, DisseminateImpliesGateExceeded) {
  Rng rng(6);
  for (int trial = 0; trial < 500; ++trial) {
    const auto model = constant_forecast_model(rng.uniform());
    const double theta = rng.uniform(0.05, 1.0);
    const auto tr = decide({theta, 100, 0}, EpochClock(100, 0), 3,
                           series({rng.uniform(), rng.uniform(), rng.uniform()}), model);
    if (tr.decision == Decision::disseminate) { EXPECT_GT(*tr.fused, theta); }
    if (tr.decision == Decision::hold && tr.fused) { EXPECT_LE(*tr.fused, theta); }
  }
}

TEST(Decide, HigherThresholdDisseminatesOnASubsetOfStates) {
  Rng rng(13);
  LstmCell cell(4);
  cell.randomize(3, 1.0);
  const UdsdmModel model{cell, FuzzySystem(), NormalizationCalibration{0.0, 1.0}};
  for (int trial = 0; trial < 3000; ++trial) {
    const auto q = series({rng.uniform(), rng.uniform(), rng.uniform()});
    const auto hi = decide({0.75, 100, 0}, EpochClock(100, 0), 3, q, model);
    const auto lo = decide({0.60, 100, 0}, EpochClock(100, 0), 3, q, model);
    if (hi.decision == Decision::disseminate) { EXPECT_EQ(lo.decision, Decision::disseminate); }
  }
}

TEST(Decide, TraceReportsRawAndNormalizedQuantum) {
  LstmCell cell(2);
  const UdsdmModel model{cell, FuzzySystem(), NormalizationCalibration{1.0, 3.0}};
  const auto tr = decide({0.6, 100, 0}, EpochClock(100, 0), 3, series({1.0, 2.0, 2.5}), model);
  EXPECT_EQ(tr.e_raw, 2.5);
  EXPECT_DOUBLE_EQ(tr.e_norm, 0.75);
  ASSERT_TRUE(tr.past_triple.has_value());
  EXPECT_DOUBLE_EQ((*tr.past_triple)[0], 0.0);
  EXPECT_DOUBLE_EQ((*tr.past_triple)[1], 0.5);
}

TEST(OnDisseminate, ResetsBaselineAndQuanta) {
  NodeState node(3, Synopsis::empty(2), EpochClock(10, 0));
  MessageLog log;
  node.observe(std::vector<double>{1, 2}, 1);
  node.observe(std::vector<double>{3, 2}, 2);
  const double drift = l1_distance(node.current.values, node.last_sent.values);
  on_disseminate(node, 2, Decision::disseminate, log);
  ASSERT_EQ(log.entries.size(), 1u);
  EXPECT_EQ(log.entries[0].node_id, 3u);
  EXPECT_EQ(log.entries[0].t_star, 2);
  EXPECT_EQ(log.entries[0].payload_length, 4u);
  EXPECT_DOUBLE_EQ(log.entries[0].drift, drift);
  EXPECT_TRUE(node.quanta.empty());
  EXPECT_EQ(update_quantum(node.current, node.last_sent).value, 0.0);
  EXPECT_EQ(node.clock.deadline(), 12);
  EXPECT_THROW(on_disseminate(node, 3, Decision::hold, log), std::logic_error);
}

TEST(NodeState, PreviousStepBaselineMeasuresOneStepChange) {
  NodeState node(0, Synopsis::empty(1), EpochClock(10, 0), QuantumBaseline::previous_step);
  node.observe(std::vector<double>{2}, 1);
  const auto before = node.current;
  const auto e = node.observe(std::vector<double>{4}, 2);
  EXPECT_DOUBLE_EQ(e.value, l1_distance(node.current.values, before.values));
}
