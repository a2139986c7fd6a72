// Copyright 2026 The fpforecast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fpforecast/forecaster.h"

#include <cmath>
#include <cstring>

#include "fpforecast/baselines.h"
#include "fpforecast/errors.h"
#include "fpforecast/metrics.h"
#include "fpforecast/suite.h"
#include "gtest/gtest.h"
#include "oracle.h"

namespace fpf {
namespace {

bool bits_equal(const Plane& a, const Plane& b) {
  return a.width() == b.width() && a.height() == b.height() &&
         std::memcmp(a.values().data(), b.values().data(),
                     a.size() * sizeof(double)) == 0;
}

bool bits_equal(const Policy& a, const Policy& b) {
  return a.probs.size() == b.probs.size() &&
         std::memcmp(a.probs.data(), b.probs.data(),
                     a.probs.size() * sizeof(double)) == 0;
}

AgentProfile agent(int id, Cell start, Cell goal) {
  AgentProfile a;
  a.id = id;
  a.start = start;
  a.goals = {{goal, 1.0}};
  return a;
}

Policy uniform_policy(const GridMap& map, int stay_only = -1) {
  Policy p;
  p.width = map.width();
  p.height = map.height();
  p.probs.assign(static_cast<std::size_t>(map.num_cells()) * kNumActions,
                 stay_only >= 0 ? 0.0 : 1.0 / kNumActions);
  if (stay_only >= 0) {
    for (int i = 0; i < map.num_cells(); ++i) p.probs[i * kNumActions] = 1.0;
  }
  return p;
}

ThetaWeights theta_for(const FeatureToggles& t) {
  return ground_truth_theta().restrict_to(plane_order_for(t));
}

TEST(Speed, AttributeAverages) {
  const SpeedStats s;
  EXPECT_NEAR(individualize_speed({1, 0, 0, 1}, s), 1.88, 1e-12);
  EXPECT_NEAR(individualize_speed({0, 0, 1, 0}, s), 1.25, 1e-12);
  EXPECT_NEAR(individualize_speed({1, 1, 1, 1}, s), 1.635, 1e-12);
  // (0.9*1.98 + 0.8*1.78 + 0.1*1.25 + 0.2*1.53) / 2.0 = 3.637 / 2.0
  EXPECT_NEAR(individualize_speed({0.8, 0.2, 0.1, 0.9}, s), 1.8185, 1e-12);
  EXPECT_THROW(individualize_speed({0, 0, 0, 0}, s), ValidationError);
  EXPECT_THROW(individualize_speed({1.5, 0, 0, 0}, s), ValidationError);
}

TEST(Speed, MacroLengthRounding) {
  EXPECT_EQ(macro_length(3, 1.25), 4);
  EXPECT_EQ(macro_length(3, 1.0), 3);
  EXPECT_EQ(macro_length(3, 1.88), 6);
  EXPECT_EQ(macro_length(2, 1.25), 3);  // 2.5 rounds up
  EXPECT_EQ(macro_length(1, 0.1), 1);
}

TEST(Speed, ProfileFallsBackToConstant) {
  AgentProfile a = agent(0, {0, 0}, {1, 1});
  EXPECT_EQ(a.speed(SpeedStats{}, 1.0, true), 1.0);
  a.attributes = AttributeWeights{0, 0, 1, 0};
  EXPECT_EQ(a.speed(SpeedStats{}, 1.0, false), 1.0);
  EXPECT_NEAR(a.speed(SpeedStats{}, 1.0, true), 1.25, 1e-12);
}

TEST(Profile, Validation) {
  GridMap map(4, 4);
  AgentProfile a = agent(3, {0, 0}, {3, 3});
  EXPECT_NO_THROW(a.validate(map));
  a.goals = {{{3, 3}, 0.5}, {{0, 3}, 0.4}};
  EXPECT_THROW(a.validate(map), ValidationError);
  a.goals.clear();
  EXPECT_THROW(a.validate(map), ValidationError);
  a.goals = {{{4, 3}, 1.0}};
  EXPECT_THROW(a.validate(map), ValidationError);
}

TEST(Config, RoundsAndValidation) {
  FPConfig c;
  c.horizon = 10;
  c.period = 3;
  EXPECT_EQ(c.rounds(), 4);
  c.period = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c.period = 11;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(MacroAction, SinglePushAndAbsorbed) {
  GridMap map(3, 1);
  Policy east = uniform_policy(map, 0);
  for (int x = 0; x < 2; ++x) {
    east.probs[x * kNumActions] = 0.0;
    east.probs[x * kNumActions + 5] = 1.0;
  }
  auto f = take_macro_action(map, east, point_mass(map, {0, 0}), 1);
  ASSERT_EQ(f.per_step.size(), 2u);
  EXPECT_EQ(f.per_step[1](1, 0), 1.0);

  auto g = take_macro_action(map, east, point_mass(map, {2, 0}), 4);
  for (const auto& p : g.per_step) EXPECT_EQ(p(2, 0), 1.0);
}

TEST(Encode, RestingAgentContributesItsMacroLength) {
  GridMap map(5, 5);
  const Policy stay = uniform_policy(map, 0);
  OtherAgentState o;
  o.priors = {1.0};
  o.current = {point_mass(map, {2, 3})};
  o.policies = {&stay};
  o.macro_len = 3;
  const OtherAgentState others[] = {o};
  const Plane p = encode_to_feature(map, others);
  EXPECT_EQ(p.sum(), 3.0);
  EXPECT_EQ(p(2, 3), 3.0);

  const Plane now = encode_to_feature(map, others, false);
  EXPECT_EQ(now(2, 3), 1.0);
  EXPECT_EQ(now.sum(), 1.0);

  EXPECT_EQ(encode_to_feature(map, {}).sum(), 0.0);
}

TEST(Encode, AdditiveOverOthers) {
  GridMap map(9, 9);
  const Policy walk = uniform_policy(map);
  OtherAgentState a, b;
  a.priors = b.priors = {1.0};
  a.current = {point_mass(map, {1, 1})};
  b.current = {point_mass(map, {7, 7})};
  a.policies = b.policies = {&walk};
  a.macro_len = b.macro_len = 2;
  const OtherAgentState both[] = {a, b};
  const OtherAgentState only_a[] = {a};
  const OtherAgentState only_b[] = {b};
  Plane sum = encode_to_feature(map, only_a);
  sum += encode_to_feature(map, only_b);
  const Plane joint = encode_to_feature(map, both);
  for (std::size_t i = 0; i < sum.size(); ++i) EXPECT_EQ(joint[i], sum[i]);
}

TEST(Encode, LongerMacroActionWidensSupport) {
  GridMap map(15, 15);
  const Policy walk = uniform_policy(map);
  std::size_t last = 0;
  for (int len = 1; len <= 5; ++len) {
    OtherAgentState o;
    o.priors = {1.0};
    o.current = {point_mass(map, {7, 7})};
    o.policies = {&walk};
    o.macro_len = len;
    const OtherAgentState others[] = {o};
    const Plane p = encode_to_feature(map, others);
    EXPECT_GE(p.nonzero_count(), last);
    last = p.nonzero_count();
  }
  EXPECT_EQ(last, 11u * 11u);
}

TEST(Encode, GoalMixtureWeightsByPrior) {
  GridMap map(5, 1);
  const Policy stay = uniform_policy(map, 0);
  OtherAgentState o;
  o.priors = {0.25, 0.75};
  o.current = {point_mass(map, {0, 0}), point_mass(map, {4, 0})};
  o.policies = {&stay, &stay};
  o.macro_len = 2;
  const OtherAgentState others[] = {o};
  const Plane p = encode_to_feature(map, others);
  EXPECT_EQ(p(0, 0), 0.5);
  EXPECT_EQ(p(4, 0), 1.5);
}

TEST(Utility, ZeroSocialMatchesEmpirical) {
  GridMap map(6, 6);
  PlaneCache cache(map);
  const FeatureToggles t;
  const AgentProfile a = agent(0, {0, 0}, {5, 4});
  const FeatureStack s = static_stack(cache, a, {5, 4}, t);
  const ThetaWeights th = theta_for(t);
  const Policy mu = update_empirical(map, s, th, {5, 4});
  const Policy u = update_utility(map, s, zero_social_planes(map), th, {5, 4});
  EXPECT_TRUE(bits_equal(mu, u));
}

TEST(Utility, ZeroSocialWeightIgnoresOthers) {
  GridMap map(6, 6);
  PlaneCache cache(map);
  const FeatureToggles t = FeatureToggles::parse("dog,soc");
  const AgentProfile a = agent(0, {0, 0}, {5, 4});
  const FeatureStack s = static_stack(cache, a, {5, 4}, t);
  // Smallest representable magnitudes stand in for zero weight.
  const auto th = ThetaWeights::from_effective(
      plane_order_for(t), std::vector{-3.0, -1.0, -1e-300, -1e-300, -1e-300});
  Plane occ(6, 6);
  occ(3, 3) = 1.0;
  const auto social = SocialNormalizer::from_max(
                          std::vector{build_social_planes(occ, {}, 0.4)})
                          .apply(build_social_planes(occ, {}, 0.4));
  const Policy mu = update_empirical(map, s, th, {5, 4});
  const Policy u = update_utility(map, s, social, th, {5, 4});
  for (std::size_t i = 0; i < mu.probs.size(); ++i) {
    EXPECT_NEAR(mu.probs[i], u.probs[i], 1e-12);
  }
}

// Corridor of two rows; cell (2,0) on the straight line carries social cost.
// Action probabilities from the planner against a dense linear solve of the
// partition function on an independently built reward.
TEST(Utility, SocialMassOnTheLineMatchesEnumerationOracle) {
  GridMap map(5, 2);
  PlaneCache cache(map);
  const FeatureToggles t = FeatureToggles::parse("dog,soc");
  const Cell goal{4, 0};
  const AgentProfile a = agent(0, {0, 0}, goal);
  const FeatureStack s = static_stack(cache, a, goal, t);
  const std::vector<double> eff{-3.0, -2.0, -4.0, -1.0, -1.0};
  const auto th = ThetaWeights::from_effective(plane_order_for(t), eff);

  Plane block(5, 2);
  block(2, 0) = 1.0;
  auto social = zero_social_planes(map);
  social[0] = std::make_shared<const FeaturePlane>(
      FeaturePlane{FeatureKind::kSocialIntimate, block, true});

  const SoftVIOptions tight{100000, 1e-14};
  const Policy mu = update_empirical(map, s, th, goal, tight);
  const Policy u = update_utility(map, s, social, th, goal, tight);

  auto oracle_probs = [&](bool with_block) {
    Plane r(5, 2);
    const double dmax = std::sqrt(17.0);
    for (int y = 0; y < 2; ++y) {
      for (int x = 0; x < 5; ++x) {
        const double dog = std::hypot(x - 4.0, y - 0.0) / dmax;
        r(x, y) = eff[0] + eff[1] * dog + (with_block ? eff[2] * block(x, y) : 0.0);
      }
    }
    const std::vector<std::uint8_t> mask(10, 0);
    const auto lz = oracle::solve_log_z(mask, 5, 2, r, goal);
    std::vector<double> p(kNumActions);
    const Cell x{1, 0};
    for (int act = 0; act < kNumActions; ++act) {
      const Cell y = oracle::step(mask, 5, 2, x, act);
      p[act] = std::exp(r(x.x, x.y) + lz[y.y * 5 + y.x] - lz[x.y * 5 + x.x]);
    }
    return p;
  };
  const auto free_p = oracle_probs(false);
  const auto block_p = oracle_probs(true);
  for (int act = 0; act < kNumActions; ++act) {
    EXPECT_NEAR(mu.prob({1, 0}, act), free_p[act], 1e-10) << act;
    EXPECT_NEAR(u.prob({1, 0}, act), block_p[act], 1e-10) << act;
  }
  // Straight east (5) wins without the block, the diagonal (8) with it.
  EXPECT_GT(mu.prob({1, 0}, 5), mu.prob({1, 0}, 8));
  EXPECT_GT(u.prob({1, 0}, 8), u.prob({1, 0}, 5));
}

class FictitiousPlay : public ::testing::Test {
 protected:
  GridMap map = map_from_ascii(std::vector<std::string>{
      "..........", "..........", "....##....", "..........", ".........."});
  std::vector<AgentProfile> agents{agent(0, {0, 1}, {9, 3}),
                                   agent(1, {9, 1}, {0, 3}),
                                   agent(2, {5, 0}, {4, 4})};
};

TEST_F(FictitiousPlay, MassConservedAndPoliciesNormalized) {
  FPConfig c;
  c.horizon = 12;
  c.period = 2;
  const auto r = run_fictitious_play(map, agents, theta_for(c.features), c);
  ASSERT_EQ(r.agents.size(), 3u);
  for (const auto& a : r.agents) {
    ASSERT_EQ(a.per_step.size(), 13u);
    for (const auto& p : a.per_step) EXPECT_NEAR(p.sum(), 1.0, 1e-9);
    EXPECT_NEAR(a.cumulative.sum(), 13.0, 1e-9);
    Plane cum(map.width(), map.height());
    for (const auto& p : a.per_step) cum += p;
    EXPECT_TRUE(bits_equal(cum, a.cumulative));
    for (const auto& per_goal : a.policies) {
      ASSERT_EQ(per_goal.size(), 6u);
      for (const auto& pol : per_goal) {
        for (int i : map.free_cells()) {
          double s = 0.0;
          for (int k = 0; k < kNumActions; ++k) s += pol->probs[i * kNumActions + k];
          EXPECT_NEAR(s, 1.0, 1e-9);
        }
      }
    }
  }
}

TEST_F(FictitiousPlay, RoundLogCountsUpdates) {
  FPConfig c;
  c.horizon = 10;
  c.period = 3;
  agents[2].goals = {{{4, 4}, 0.5}, {{9, 4}, 0.5}};
  const auto r = run_fictitious_play(map, agents, theta_for(c.features), c);
  ASSERT_EQ(r.round_log.size(), 4u);
  const int starts[] = {0, 3, 6, 9};
  const int steps[] = {3, 3, 3, 1};
  for (int k = 0; k < 4; ++k) {
    EXPECT_EQ(r.round_log[k].round, k);
    EXPECT_EQ(r.round_log[k].start_step, starts[k]);
    EXPECT_EQ(r.round_log[k].steps, steps[k]);
    EXPECT_EQ(r.round_log[k].utility_updates, 4);
  }
  EXPECT_EQ(r.round_for_step(0), 0);
  EXPECT_EQ(r.round_for_step(5), 1);
  EXPECT_EQ(r.round_for_step(9), 3);
  EXPECT_EQ(r.round_for_step(40), 3);
  EXPECT_EQ(r.agents[2].policies.size(), 2u);
}

TEST_F(FictitiousPlay, ShortHorizonIsPrefixOfLonger) {
  FPConfig c;
  c.horizon = 8;
  c.period = 3;
  const auto th = theta_for(c.features);
  const auto a = run_fictitious_play(map, agents, th, c);
  c.horizon = 16;
  const auto b = run_fictitious_play(map, agents, th, c);
  for (std::size_t n = 0; n < agents.size(); ++n) {
    for (int t = 0; t <= 8; ++t) {
      EXPECT_TRUE(bits_equal(a.agents[n].per_step[t], b.agents[n].per_step[t]));
    }
    for (int r = 0; r < a.rounds; ++r) {
      EXPECT_TRUE(bits_equal(*a.agents[n].policies[0][r],
                             *b.agents[n].policies[0][r]));
    }
  }
}

TEST_F(FictitiousPlay, SingleAgentIsBitIdenticalToNmdp) {
  FPConfig c;
  c.horizon = 9;
  const auto th = theta_for(c.features);
  const std::vector<AgentProfile> one{agents[0]};
  const auto fp = run_fictitious_play(map, one, th, c);
  const auto nm = forecast_nmdp(map, one, th, c);
  ASSERT_EQ(fp.agents[0].per_step.size(), nm.agents[0].per_step.size());
  for (std::size_t t = 0; t < fp.agents[0].per_step.size(); ++t) {
    EXPECT_TRUE(bits_equal(fp.agents[0].per_step[t], nm.agents[0].per_step[t]));
  }
  for (const auto& p : fp.agents[0].policies[0]) {
    EXPECT_TRUE(bits_equal(*p, *nm.agents[0].policies[0][0]));
  }
}

TEST_F(FictitiousPlay, SocialOffIsBitIdenticalToNmdp) {
  FPConfig c;
  c.horizon = 9;
  c.period = 2;
  c.features = FeatureToggles::parse("occ,dog,bod");
  const auto th = theta_for(c.features);
  const auto fp = run_fictitious_play(map, agents, th, c);
  const auto nm = forecast_nmdp(map, agents, th, c);
  EXPECT_EQ(fp.model, "fp-nosoc");
  for (std::size_t n = 0; n < agents.size(); ++n) {
    EXPECT_TRUE(bits_equal(fp.agents[n].cumulative, nm.agents[n].cumulative));
    for (std::size_t t = 0; t < fp.agents[n].per_step.size(); ++t) {
      EXPECT_TRUE(bits_equal(fp.agents[n].per_step[t], nm.agents[n].per_step[t]));
    }
  }
}

TEST_F(FictitiousPlay, WholeHorizonPeriodPlansOnce) {
  FPConfig c;
  c.horizon = 7;
  c.period = 7;
  const auto r = run_fictitious_play(map, agents, theta_for(c.features), c);
  ASSERT_EQ(r.round_log.size(), 1u);
  EXPECT_EQ(r.round_log[0].steps, 7);
  for (const auto& a : r.agents) EXPECT_EQ(a.policies[0].size(), 1u);
}

TEST_F(FictitiousPlay, SweepVariantsAreDeterministic) {
  FPConfig c;
  c.horizon = 6;
  c.sweep = SweepOrder::kRandom;
  c.seed = 11;
  c.gauss_seidel = true;
  const auto th = theta_for(c.features);
  const auto a = run_fictitious_play(map, agents, th, c);
  const auto b = run_fictitious_play(map, agents, th, c);
  for (std::size_t n = 0; n < agents.size(); ++n) {
    EXPECT_TRUE(bits_equal(a.agents[n].cumulative, b.agents[n].cumulative));
  }
  // Under Gauss-Seidel each agent is solved on its own.
  EXPECT_EQ(a.round_log[0].utility_updates, 3);
}

TEST_F(FictitiousPlay, RejectsMismatchedWeights) {
  FPConfig c;
  const auto th = theta_for(FeatureToggles::parse("occ,dog"));
  EXPECT_THROW(run_fictitious_play(map, agents, th, c), ValidationError);
  std::vector<AgentProfile> dup = agents;
  dup[1].id = 0;
  EXPECT_THROW(run_fictitious_play(map, dup, theta_for(c.features), c),
               ValidationError);
}

TEST(FictitiousPlayScenario, HeadOnCorridorSeparatesWithLearnedWeights) {
  SuiteOptions so;
  so.episodes = 10;
  const auto all = synthetic_suite(so);
  std::vector<EvalCase> corridor;
  for (const auto& c : all) {
    if (c.scenario.name == "corridor_head_on") corridor.push_back(c);
  }
  ASSERT_EQ(corridor.size(), 1u);
  FPConfig cfg;
  TrainConfig tc;
  tc.optimizer = Optimizer::kLbfgs;
  tc.max_epochs = 100;
  const auto train_set = filter_folds(corridor, [](int f) { return f != 0; });
  const auto learned =
      train(build_demonstrations(train_set, cfg.features, cfg), tc).theta;

  const Scenario& sc = corridor[0].scenario;
  cfg.horizon = corridor[0].longest_track();
  const auto fp = forecast(ModelKind::kFP, sc.map, sc.agents, learned, cfg);
  const auto nm = forecast(ModelKind::kNMDP, sc.map, sc.agents, learned, cfg);
  EXPECT_LT(compute_scr(fp), compute_scr(nm));
}

}  // namespace
}  // namespace fpf
