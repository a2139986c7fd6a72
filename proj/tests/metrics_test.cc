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

#include "fpforecast/metrics.h"

#include <cmath>

#include "fpforecast/errors.h"
#include "fpforecast/suite.h"
#include "gtest/gtest.h"
#include "json.hpp"

namespace fpf {
namespace {

PolicyPtr fixed_policy(int w, int h, std::vector<double> row) {
  auto p = std::make_shared<Policy>();
  p->width = w;
  p->height = h;
  for (int i = 0; i < w * h; ++i) p->probs.insert(p->probs.end(), row.begin(), row.end());
  return p;
}

std::vector<double> uniform_row() { return std::vector<double>(kNumActions, 1.0 / 9.0); }

std::vector<double> only(int a) {
  std::vector<double> r(kNumActions, 0.0);
  r[a] = 1.0;
  return r;
}

// One agent, stationary policy per goal, horizon 20.
ForecastResult single(int w, int h, std::vector<PolicyPtr> per_goal,
                      std::vector<double> priors) {
  ForecastResult r;
  r.horizon = 20;
  r.period = 20;
  r.rounds = 1;
  AgentForecast a;
  a.id = 7;
  for (std::size_t g = 0; g < per_goal.size(); ++g) {
    a.goals.push_back({{0, 0}, priors[g]});
    a.policies.push_back({per_goal[g]});
  }
  a.per_step.emplace_back(w, h);
  r.agents.push_back(std::move(a));
  return r;
}

Trajectory east_walk(int len) {
  Trajectory t;
  t.agent_id = 7;
  for (int x = 0; x <= len; ++x) t.states.push_back({x, 0});
  t.actions.assign(len, 5);
  return t;
}

TEST(Nll, DeterministicMatchIsZero) {
  const auto r = single(12, 1, {fixed_policy(12, 1, only(5))}, {1.0});
  const auto n = compute_nll(r, east_walk(10));
  EXPECT_EQ(n.value, 0.0);
  EXPECT_FALSE(n.sentinel);
}

TEST(Nll, UniformPolicyIsLengthTimesLog9) {
  const auto r = single(12, 1, {fixed_policy(12, 1, uniform_row())}, {1.0});
  EXPECT_NEAR(compute_nll(r, east_walk(10)).value, 10.0 * std::log(9.0), 1e-12);
  EXPECT_NEAR(compute_nll(r, east_walk(10)).value, 21.97, 5e-3);
}

TEST(Nll, ZeroProbabilityGivesSentinel) {
  const auto r = single(12, 1, {fixed_policy(12, 1, only(4))}, {1.0});
  const auto n = compute_nll(r, east_walk(3));
  EXPECT_TRUE(n.sentinel);
  EXPECT_EQ(n.value, kNllSentinel);
}

TEST(Nll, GoalMixturePerStep) {
  auto half = uniform_row();
  half.assign(kNumActions, 0.0);
  half[5] = 0.5;
  half[0] = 0.5;
  const auto r = single(12, 1, {fixed_policy(12, 1, only(5)), fixed_policy(12, 1, half)},
                        {0.25, 0.75});
  // Each step: 0.25 * 1 + 0.75 * 0.5 = 0.625.
  EXPECT_NEAR(compute_nll(r, east_walk(4)).value, -4.0 * std::log(0.625), 1e-12);
}

TEST(Nll, UsesRoundOfEachStep) {
  ForecastResult r = single(12, 1, {fixed_policy(12, 1, only(5))}, {1.0});
  r.period = 2;
  r.rounds = 3;
  r.agents[0].policies[0] = {fixed_policy(12, 1, only(5)),
                             fixed_policy(12, 1, uniform_row()),
                             fixed_policy(12, 1, only(5))};
  // Steps 2 and 3 fall in round 1; steps 4.. in round 2.
  EXPECT_NEAR(compute_nll(r, east_walk(7)).value, 2.0 * std::log(9.0), 1e-12);
}

TEST(Nll, AdditiveOverConcatenation) {
  auto row = uniform_row();
  row[5] = 0.3;
  row[0] = 1.0 / 9.0 + (1.0 / 9.0 - 0.3);
  const auto r = single(12, 1, {fixed_policy(12, 1, row)}, {1.0});
  Trajectory second;
  second.agent_id = 7;
  for (int x = 4; x <= 9; ++x) second.states.push_back({x, 0});
  second.actions.assign(5, 5);
  EXPECT_NEAR(compute_nll(r, east_walk(9)).value,
              compute_nll(r, east_walk(4)).value + compute_nll(r, second).value,
              1e-12);
}

TEST(Nll, Errors) {
  const auto r = single(12, 1, {fixed_policy(12, 1, uniform_row())}, {1.0});
  Trajectory other = east_walk(2);
  other.agent_id = 3;
  EXPECT_THROW(compute_nll(r, other), ValidationError);
  EXPECT_THROW(compute_nll(r, east_walk(13)), ValidationError);  // off the grid
  ForecastResult short_r = r;
  short_r.horizon = 3;
  EXPECT_THROW(compute_nll(short_r, east_walk(5)), ValidationError);
}

// Agents with the given per-step planes on a 4x1 grid.
ForecastResult fields(std::vector<std::vector<std::vector<double>>> agents) {
  ForecastResult r;
  int id = 0;
  for (const auto& steps : agents) {
    AgentForecast a;
    a.id = id++;
    for (const auto& v : steps) {
      Plane p(4, 1);
      for (int x = 0; x < 4; ++x) p(x, 0) = v[x];
      a.per_step.push_back(p);
    }
    r.agents.push_back(std::move(a));
  }
  return r;
}

TEST(Scr, Examples) {
  EXPECT_EQ(compute_scr(fields({{{1, 0, 0, 0}}, {{0, 1, 0, 0}}})), 0.0);
  EXPECT_EQ(compute_scr(fields({{{0, 0, 1, 0}}, {{0, 0, 1, 0}}})), 1.0);
  EXPECT_EQ(compute_scr(fields({{{0.5, 0.5, 0, 0}}, {{0.5, 0.5, 0, 0}}})), 0.5);
  EXPECT_THROW(compute_scr(fields({{{1, 0, 0, 0}}})), ValidationError);
}

TEST(Scr, SumsOverStepsAndPairs) {
  const auto r = fields({{{1, 0, 0, 0}, {0, 1, 0, 0}},
                         {{1, 0, 0, 0}, {0, 0, 1, 0}},
                         {{0.5, 0, 0.5, 0}, {0, 0.5, 0.5, 0}}});
  // t0: 1 + 0.5 + 0.5; t1: 0 + 0.5 + 0.5.
  EXPECT_DOUBLE_EQ(compute_scr(r), 3.0);
  // Literal: t0 1 * 1 * 0.5; t1 0.
  EXPECT_DOUBLE_EQ(compute_scr(r, ScrMode::kLiteral), 0.5);
}

TEST(Scr, SymmetricUnderRelabeling) {
  const std::vector<std::vector<std::vector<double>>> a{
      {{0.2, 0.3, 0.5, 0}}, {{0.1, 0.6, 0.1, 0.2}}, {{0, 0.25, 0.25, 0.5}}};
  auto b = a;
  std::swap(b[0], b[2]);
  EXPECT_DOUBLE_EQ(compute_scr(fields(a)), compute_scr(fields(b)));
}

TEST(Scr, SplittingMassScalesQuadratically) {
  // A point mass against a point mass: 1. Both split uniformly over k
  // shared cells: k * (1/k)^2 = 1/k.
  EXPECT_DOUBLE_EQ(compute_scr(fields({{{1, 0, 0, 0}}, {{1, 0, 0, 0}}})), 1.0);
  EXPECT_DOUBLE_EQ(compute_scr(fields({{{0.5, 0.5, 0, 0}}, {{0.5, 0.5, 0, 0}}})), 0.5);
  EXPECT_DOUBLE_EQ(
      compute_scr(fields({{{0.25, 0.25, 0.25, 0.25}}, {{0.25, 0.25, 0.25, 0.25}}})),
      0.25);
}

TEST(GoalGrid, StrideLatticePlusBorder) {
  GridMap map(9, 9);
  const auto g = GoalHypothesisGrid::make(map, 4);
  // 32 border cells plus the interior lattice cell (4, 4).
  EXPECT_EQ(g.cells.size(), 33u);
  double total = 0.0;
  for (const auto& h : g.hypotheses()) total += h.prior;
  EXPECT_NEAR(total, 1.0, 1e-12);

  const GridMap walled = map_from_ascii(std::vector<std::string>{
      "#####", "#...#", "#...#", "#...#", "#####"});
  const auto w = GoalHypothesisGrid::make(walled, 2);
  const std::vector<Cell> want{{2, 2}};
  EXPECT_EQ(w.cells, want);
  EXPECT_THROW(GoalHypothesisGrid::make(map, 0), ValidationError);
}

class Corridor : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    cases_ = new std::vector<EvalCase>();
    for (auto& c : synthetic_suite()) {
      if (c.scenario.name == "corridor_head_on" || c.scenario.name == "doorway") {
        cases_->push_back(std::move(c));
      }
    }
  }
  static void TearDownTestSuite() {
    delete cases_;
    cases_ = nullptr;
  }
  static std::vector<EvalCase>* cases_;
};

std::vector<EvalCase>* Corridor::cases_ = nullptr;

TEST_F(Corridor, HeldOutNllBeatsUniform) {
  FPConfig cfg;
  cfg.horizon = 0;
  TrainConfig tc;
  tc.optimizer = Optimizer::kLbfgs;
  tc.max_epochs = 100;
  const auto train_set = filter_folds(*cases_, [](int f) { return f != 0; });
  const auto test_set = filter_folds(*cases_, [](int f) { return f == 0; });
  const auto toggles = model_toggles(ModelKind::kNMDP, cfg.features);
  const auto th = train(build_demonstrations(train_set, toggles, cfg), tc).theta;
  for (const auto& c : test_set) {
    FPConfig run = cfg;
    run.horizon = c.longest_track();
    const auto r = forecast(ModelKind::kNMDP, c.scenario.map, c.scenario.agents, th, run);
    for (const auto& e : c.episodes) {
      for (const auto& t : e.tracks) {
        EXPECT_LE(compute_nll(r, t).value, t.length() * std::log(9.0));
      }
    }
  }
}

TEST_F(Corridor, ReportAggregatesAndIsDeterministic) {
  FPConfig cfg;
  cfg.horizon = 0;
  const auto th = ground_truth_theta();
  const auto a = evaluate(ModelKind::kFP, *cases_, th, cfg);
  const auto b = evaluate(ModelKind::kFP, *cases_, th, cfg);
  EXPECT_EQ(report_json(a), report_json(b));
  ASSERT_EQ(a.per_scenario.size(), 2u);
  double nll = 0.0;
  int n = 0;
  for (const auto& s : a.per_scenario) {
    nll += s.nll * s.trajectories;
    n += s.trajectories;
  }
  EXPECT_EQ(a.trajectories, n);
  EXPECT_NEAR(a.nll, nll / n, 1e-12);
  EXPECT_NEAR(a.scr, (a.per_scenario[0].scr + a.per_scenario[1].scr) / 2.0, 1e-15);
  EXPECT_EQ(a.model, "fp");
  EXPECT_EQ(a.window, 3);
  EXPECT_EQ(a.features, "occ,dog,bod,soc");

  const auto j = nlohmann::json::parse(report_json(a));
  EXPECT_EQ(j["per_scenario"].size(), 2u);
  EXPECT_EQ(j["scr_mode"], "pairwise");
  const std::vector<MetricReport> rows{a};
  const std::string csv = report_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "model,W,tau,features,no_dest,scr_mode,scenario,nll,scr,trajectories,nll_sentinel");
}

TEST_F(Corridor, NoDestinationCostsLikelihood) {
  FPConfig cfg;
  cfg.horizon = 0;
  const auto th = ground_truth_theta();
  for (ModelKind k : {ModelKind::kFP, ModelKind::kNMDP}) {
    const auto known = evaluate(k, *cases_, th, cfg);
    const auto hidden = evaluate_no_dest(k, *cases_, th, cfg, 4);
    EXPECT_TRUE(hidden.no_dest);
    EXPECT_GE(hidden.nll, known.nll);
  }
}

TEST_F(Corridor, SingleCellGridEqualsEvaluate) {
  FPConfig cfg;
  cfg.horizon = 0;
  cfg.window = 5;
  cfg.period = 3;
  const auto th = ground_truth_theta();
  const int w[] = {5};
  const int p[] = {3};
  const auto g = grid_search(ModelKind::kFP, *cases_, th, cfg, w, p);
  ASSERT_EQ(g.cells.size(), 1u);
  ASSERT_TRUE(g.at(0, 0).report);
  EXPECT_EQ(report_json(*g.at(0, 0).report),
            report_json(evaluate(ModelKind::kFP, *cases_, th, cfg)));
}

TEST_F(Corridor, GridRecordsFailuresPerCell) {
  FPConfig cfg;
  cfg.horizon = 4;
  const auto th = ground_truth_theta();
  const int w[] = {3};
  const int p[] = {1, 9};
  const auto g = grid_search(ModelKind::kFP, *cases_, th, cfg, w, p);
  EXPECT_FALSE(g.at(0, 0).report.has_value());  // demos longer than T
  EXPECT_FALSE(g.at(0, 0).error.empty());
  EXPECT_FALSE(g.at(0, 1).report.has_value());  // tau > T
  EXPECT_NE(grid_text(g).find("W\\tau"), std::string::npos);
}

TEST_F(Corridor, AblationIdentityWithoutSocial) {
  FPConfig cfg;
  cfg.horizon = 0;
  const auto base = ground_truth_theta();
  std::vector<AblationRow> rows;
  for (const char* list : {"occ,dog", "occ,dog,soc"}) {
    AblationRow r;
    r.toggles = FeatureToggles::parse(list);
    r.theta = base.restrict_to(plane_order_for(r.toggles));
    rows.push_back(r);
  }
  const auto out = run_ablation(*cases_, rows, cfg);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_TRUE(out[0].identity_checked);
  EXPECT_TRUE(out[0].identity_holds);
  EXPECT_FALSE(out[1].identity_checked);
  EXPECT_LT(out[1].fp.scr, out[1].nmdp.scr);
  EXPECT_NE(ablation_text(out).find("occ,dog,soc"), std::string::npos);

  rows[0].theta = base;
  EXPECT_THROW(run_ablation(*cases_, rows, cfg), ValidationError);
}

}  // namespace
}  // namespace fpf
