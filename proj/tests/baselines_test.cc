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

#include "fpforecast/baselines.h"

#include <cstring>

#include "fpforecast/errors.h"
#include "fpforecast/metrics.h"
#include "fpforecast/suite.h"
#include "gtest/gtest.h"

namespace fpf {
namespace {

bool bits_equal(const Plane& a, const Plane& b) {
  return a.size() == b.size() &&
         std::memcmp(a.values().data(), b.values().data(),
                     a.size() * sizeof(double)) == 0;
}

AgentProfile agent(int id, Cell start, Cell goal) {
  AgentProfile a;
  a.id = id;
  a.start = start;
  a.goals = {{goal, 1.0}};
  return a;
}

TEST(Models, NamesRoundTrip) {
  for (ModelKind k : kAllModels) EXPECT_EQ(model_from_name(model_name(k)), k);
  EXPECT_EQ(model_name(ModelKind::kFPSpeed), "fp-speed");
  EXPECT_THROW(model_from_name("lta"), ValidationError);
}

TEST(Models, Toggles) {
  const FeatureToggles all;
  EXPECT_EQ(model_toggles(ModelKind::kNMDP, all).to_string(), "occ,dog,bod");
  EXPECT_EQ(model_toggles(ModelKind::kMDPCV, all).to_string(), "occ,dog,bod,cv");
  EXPECT_EQ(model_toggles(ModelKind::kMTA, all).to_string(), "soc");
  EXPECT_EQ(model_toggles(ModelKind::kFP, all).to_string(), "occ,dog,bod,soc");
}

TEST(Rays, StraightAndStopAtGoal) {
  const AgentProfile a = agent(0, {0, 2}, {4, 2});
  const auto r = constant_velocity_ray(a, 1.0, 6);
  const std::vector<Cell> want{{0, 2}, {1, 2}, {2, 2}, {3, 2},
                               {4, 2}, {4, 2}, {4, 2}};
  EXPECT_EQ(r, want);
  // Two cells per step along the diagonal: round(k * 2 / sqrt 2) = 0, 1, 3.
  const AgentProfile d = agent(0, {0, 0}, {6, 6});
  const auto rd = constant_velocity_ray(d, 2.0, 3);
  const std::vector<Cell> want_d{{0, 0}, {1, 1}, {3, 3}, {4, 4}};
  EXPECT_EQ(rd, want_d);
}

TEST(Rays, LikeliestGoal) {
  AgentProfile a = agent(0, {2, 2}, {0, 2});
  a.goals = {{{0, 2}, 0.3}, {{4, 2}, 0.7}};
  const auto r = constant_velocity_ray(a, 1.0, 2);
  EXPECT_EQ(r.back(), (Cell{4, 2}));
}

TEST(CollisionRegion, HeadOnMeetsAtMidpoint) {
  GridMap map(11, 5);
  {
    const AgentProfile a = agent(0, {0, 2}, {10, 2});
    const AgentProfile b = agent(1, {10, 2}, {0, 2});
    const std::vector<std::vector<Cell>> rays{constant_velocity_ray(a, 1.0, 12),
                                              constant_velocity_ray(b, 1.0, 12)};
    const auto region = collision_region(map, rays);
    for (int i = 0; i < map.num_cells(); ++i) {
      EXPECT_EQ(region[i], map.cell(i) == (Cell{5, 2})) << to_string(map.cell(i));
    }
  }
  {
    const AgentProfile a = agent(0, {0, 2}, {9, 2});
    const AgentProfile b = agent(1, {9, 2}, {0, 2});
    const std::vector<std::vector<Cell>> rays{constant_velocity_ray(a, 1.0, 12),
                                              constant_velocity_ray(b, 1.0, 12)};
    const auto region = collision_region(map, rays);
    int count = 0;
    for (int i = 0; i < map.num_cells(); ++i) count += region[i];
    EXPECT_EQ(count, 2);
    EXPECT_TRUE(region[map.index({4, 2})]);
    EXPECT_TRUE(region[map.index({5, 2})]);
  }
}

TEST(CollisionRegion, PerpendicularRaysLightTheWindowAroundTheCrossing) {
  GridMap map(11, 11);
  const AgentProfile a = agent(0, {0, 5}, {10, 5});
  const AgentProfile b = agent(1, {5, 0}, {5, 10});
  const std::vector<std::vector<Cell>> rays{constant_velocity_ray(a, 1.0, 10),
                                            constant_velocity_ray(b, 1.0, 10)};
  const auto region = collision_region(map, rays);
  // Steps 4, 5, 6 are within Chebyshev 1.
  const Cell marked[] = {{4, 5}, {5, 4}, {5, 5}, {6, 5}, {5, 6}};
  int count = 0;
  for (int i = 0; i < map.num_cells(); ++i) count += region[i];
  EXPECT_EQ(count, 5);
  for (Cell c : marked) EXPECT_TRUE(region[map.index(c)]);

  const PlanePtr plane = build_region_feature(map, region);
  EXPECT_DOUBLE_EQ(plane->values(5, 5), 5.0 / 25.0);
  for (int y = 3; y <= 7; ++y) {
    for (int x = 3; x <= 7; ++x) EXPECT_GT(plane->values(x, y), 0.0);
  }
  EXPECT_EQ(plane->values(0, 0), 0.0);
  EXPECT_EQ(plane->values(10, 10), 0.0);
}

TEST(Mdpcv, ParallelRaysReduceToNmdp) {
  GridMap map(12, 7);
  const std::vector<AgentProfile> agents{agent(0, {0, 0}, {11, 0}),
                                         agent(1, {0, 6}, {11, 6})};
  FPConfig c;
  c.horizon = 14;
  c.features.collision_region = true;
  const ThetaWeights th = ThetaWeights::from_effective(
      plane_order_for(FeatureToggles::parse("occ,dog,bod,soc,cv")),
      std::vector{-2.5, -1.0, -2.5, -0.5, -6.0, -3.0, -0.5, -4.0});
  const auto cv = forecast(ModelKind::kMDPCV, map, agents, th, c);
  const auto nm = forecast(ModelKind::kNMDP, map, agents, th, c);
  EXPECT_EQ(cv.model, "mdpcv");
  for (std::size_t n = 0; n < agents.size(); ++n) {
    for (std::size_t t = 0; t < cv.agents[n].per_step.size(); ++t) {
      EXPECT_TRUE(bits_equal(cv.agents[n].per_step[t], nm.agents[n].per_step[t]));
    }
  }
}

TEST(Mdpcv, CollisionCostPushesMassOffTheMeetingPoint) {
  GridMap map(11, 5);
  const std::vector<AgentProfile> agents{agent(0, {0, 2}, {10, 2}),
                                         agent(1, {10, 2}, {0, 2})};
  FPConfig c;
  c.horizon = 12;
  const ThetaWeights th = ThetaWeights::from_effective(
      plane_order_for(FeatureToggles::parse("occ,dog,bod,soc,cv")),
      std::vector{-2.5, -1.0, -2.5, -0.5, -6.0, -3.0, -0.5, -20.0});
  const auto cv = forecast(ModelKind::kMDPCV, map, agents, th, c);
  const auto nm = forecast(ModelKind::kNMDP, map, agents, th, c);
  EXPECT_LT(cv.agents[0].cumulative(5, 2), nm.agents[0].cumulative(5, 2));
}

TEST(Nmdp, OtherAgentsDoNotChangeAnAgentsForecast) {
  GridMap map(9, 9);
  const ThetaWeights th = ground_truth_theta();
  FPConfig c;
  c.horizon = 10;
  const std::vector<AgentProfile> one{agent(4, {0, 0}, {8, 8})};
  const std::vector<AgentProfile> three{agent(1, {8, 0}, {0, 8}), one[0],
                                        agent(2, {4, 0}, {4, 8})};
  const auto a = forecast_nmdp(map, one, th, c);
  const auto b = forecast_nmdp(map, three, th, c);
  ASSERT_EQ(b.agents[1].id, 4);
  for (std::size_t t = 0; t < a.agents[0].per_step.size(); ++t) {
    EXPECT_TRUE(bits_equal(a.agents[0].per_step[t], b.agents[1].per_step[t]));
  }
  EXPECT_EQ(b.rounds, 1);
  EXPECT_EQ(b.model, "nmdp");
}

TEST(Nmdp, CrossingOverlapsAndSeparatedCorridorsDoNot) {
  const ThetaWeights th = ground_truth_theta();
  FPConfig c;
  c.horizon = 12;
  GridMap open(9, 9);
  const std::vector<AgentProfile> crossing{agent(0, {0, 4}, {8, 4}),
                                           agent(1, {4, 0}, {4, 8})};
  EXPECT_GT(compute_scr(forecast_nmdp(open, crossing, th, c)), 0.0);

  const GridMap split = map_from_ascii(std::vector<std::string>{
      "..........", "..........", "##########", "..........", ".........."});
  const std::vector<AgentProfile> apart{agent(0, {0, 0}, {9, 1}),
                                        agent(1, {9, 4}, {0, 3})};
  EXPECT_EQ(compute_scr(forecast_nmdp(split, apart, th, c)), 0.0);
}

TEST(Mta, RunsRoundLoopOnBiasAndSocialOnly) {
  GridMap map(9, 5);
  const std::vector<AgentProfile> agents{agent(0, {0, 2}, {8, 2}),
                                         agent(1, {8, 2}, {0, 2})};
  FPConfig c;
  c.horizon = 10;
  c.period = 2;
  const auto r = forecast(ModelKind::kMTA, map, agents, ground_truth_theta(), c);
  EXPECT_EQ(r.model, "mta");
  EXPECT_EQ(r.rounds, 5);
  for (const auto& a : r.agents) {
    EXPECT_EQ(a.policies[0].size(), 5u);
    EXPECT_EQ(a.policies[0][0]->source_theta.size(), 4u);
    for (const auto& p : a.per_step) EXPECT_NEAR(p.sum(), 1.0, 1e-9);
  }
}

TEST(Mta, LessGoalDirectedThanFpOnStraightDemos) {
  GridMap map(12, 5);
  const std::vector<AgentProfile> agents{agent(0, {0, 2}, {11, 2})};
  FPConfig c;
  c.horizon = 11;
  const ThetaWeights th = ground_truth_theta();
  Trajectory demo;
  demo.agent_id = 0;
  for (int x = 0; x <= 11; ++x) demo.states.push_back({x, 2});
  demo.actions.assign(11, 5);
  const auto mta = forecast(ModelKind::kMTA, map, agents, th, c);
  const auto fp = forecast(ModelKind::kFP, map, agents, th, c);
  EXPECT_GE(compute_nll(mta, demo).value, compute_nll(fp, demo).value);
}

TEST(Dispatch, FpSpeedUsesAttributeSpeeds) {
  GridMap map(9, 5);
  std::vector<AgentProfile> agents{agent(0, {0, 2}, {8, 2}),
                                   agent(1, {8, 2}, {0, 2})};
  agents[0].attributes = AttributeWeights{1, 0, 0, 1};
  agents[1].attributes = AttributeWeights{0, 0, 1, 0};
  FPConfig c;
  c.horizon = 8;
  const auto fp = forecast(ModelKind::kFP, map, agents, ground_truth_theta(), c);
  const auto fs = forecast(ModelKind::kFPSpeed, map, agents, ground_truth_theta(), c);
  EXPECT_EQ(fp.agents[0].macro_len, 3);
  EXPECT_EQ(fp.agents[1].macro_len, 3);
  EXPECT_EQ(fs.agents[0].macro_len, 6);
  EXPECT_EQ(fs.agents[1].macro_len, 4);
  EXPECT_EQ(fs.model, "fp-speed");
}

TEST(Dispatch, MissingPlaneWeightsAreRejected) {
  GridMap map(5, 5);
  const std::vector<AgentProfile> agents{agent(0, {0, 0}, {4, 4})};
  FPConfig c;
  c.horizon = 4;
  const auto th = ground_truth_theta();
  EXPECT_THROW(forecast(ModelKind::kMDPCV, map, agents, th, c), ValidationError);
}

}  // namespace
}  // namespace fpf
