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

#include "fpforecast/suite.h"

#include <algorithm>
#include <cmath>
#include <exception>

#include "fpforecast/baselines.h"
#include "fpforecast/errors.h"

namespace fpf {

GridMap map_from_ascii(std::span<const std::string> rows, double cell_size) {
  if (rows.empty()) throw ValidationError("empty map");
  const int w = static_cast<int>(rows.front().size());
  const int h = static_cast<int>(rows.size());
  std::vector<std::uint8_t> mask;
  mask.reserve(static_cast<std::size_t>(w) * h);
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != w) throw ValidationError("ragged map rows");
    for (char c : r) {
      if (c != '#' && c != '.') throw ValidationError("map rows use '#' and '.'");
      mask.push_back(c == '#' ? 1 : 0);
    }
  }
  return GridMap(w, h, cell_size, std::move(mask));
}

ThetaWeights ground_truth_theta() {
  return ThetaWeights::from_effective(
      plane_order_for(FeatureToggles{}),
      std::vector<double>{-2.5, -1.0, -2.5, -0.5, -6.0, -3.0, -0.5});
}

namespace {

std::vector<std::string> open_rows(int w, int h) {
  return std::vector<std::string>(h, std::string(w, '.'));
}

// Corridor of `lanes` free rows between two walls.
std::vector<std::string> corridor_rows(int w, int lanes) {
  std::vector<std::string> rows;
  rows.push_back(std::string(w, '#'));
  for (int i = 0; i < lanes; ++i) rows.push_back(std::string(w, '.'));
  rows.push_back(std::string(w, '#'));
  return rows;
}

void fill(std::vector<std::string>& rows, int x0, int y0, int x1, int y1) {
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) rows[y][x] = '#';
  }
}

AgentProfile agent(int id, Cell start, Cell goal, AttributeWeights attrs) {
  AgentProfile a;
  a.id = id;
  a.start = start;
  a.goals = {{goal, 1.0}};
  a.orientation = std::atan2(goal.y - start.y, goal.x - start.x);
  a.attributes = attrs;
  return a;
}

constexpr AttributeWeights kYoungMale{0.9, 0.1, 0.1, 0.9};
constexpr AttributeWeights kYoungFemale{0.1, 0.9, 0.2, 0.8};
constexpr AttributeWeights kOldMale{0.8, 0.2, 0.9, 0.1};
constexpr AttributeWeights kOldFemale{0.2, 0.8, 0.8, 0.2};

Scenario make(std::string name, std::vector<std::string> rows,
              std::vector<AgentProfile> agents, std::string notes) {
  Scenario s;
  s.name = std::move(name);
  s.map = map_from_ascii(rows);
  s.agents = std::move(agents);
  s.notes = std::move(notes);
  s.validate();
  return s;
}

}  // namespace

std::vector<Scenario> synthetic_scenarios() {
  std::vector<Scenario> out;

  out.push_back(make("corridor_head_on", corridor_rows(16, 3),
                     {agent(0, {0, 2}, {15, 1}, kYoungMale),
                      agent(1, {15, 2}, {0, 3}, kOldFemale)},
                     "two agents meet head-on in a 3-wide corridor"));

  out.push_back(make("corridor_head_on_wide", corridor_rows(16, 5),
                     {agent(0, {0, 3}, {15, 2}, kYoungFemale),
                      agent(1, {15, 3}, {0, 4}, kOldMale)},
                     "head-on in a 5-wide corridor"));

  out.push_back(make("crossing_perpendicular", open_rows(13, 13),
                     {agent(0, {0, 6}, {12, 6}, kYoungMale),
                      agent(1, {6, 0}, {6, 12}, kYoungFemale)},
                     "perpendicular crossing in the open"));

  out.push_back(make("crossing_diagonal", open_rows(13, 13),
                     {agent(0, {0, 0}, {12, 12}, kOldMale),
                      agent(1, {12, 0}, {0, 12}, kYoungMale)},
                     "diagonal crossing in the open"));

  out.push_back(make("crossing_acute", open_rows(15, 11),
                     {agent(0, {0, 3}, {14, 7}, kYoungFemale),
                      agent(1, {0, 7}, {14, 3}, kOldFemale)},
                     "paths cross at a shallow angle"));

  out.push_back(make("same_direction", corridor_rows(18, 3),
                     {agent(0, {0, 2}, {17, 1}, kYoungMale),
                      agent(1, {3, 2}, {17, 3}, kOldFemale)},
                     "a faster walker behind a slower one"));

  out.push_back(make("group_vs_single", open_rows(16, 7),
                     {agent(0, {0, 2}, {15, 2}, kYoungMale),
                      agent(1, {0, 4}, {15, 4}, kYoungFemale),
                      agent(2, {15, 3}, {0, 3}, kOldMale)},
                     "a pair walking side by side meets a single walker"));

  out.push_back(make("circle_swap_4", open_rows(13, 13),
                     {agent(0, {6, 0}, {7, 12}, kYoungMale),
                      agent(1, {6, 12}, {5, 0}, kOldFemale),
                      agent(2, {12, 6}, {0, 7}, kYoungFemale),
                      agent(3, {0, 6}, {12, 5}, kOldMale)},
                     "four agents swap to the opposite side"));

  {
    auto rows = open_rows(16, 9);
    fill(rows, 6, 3, 9, 5);
    out.push_back(make("detour_block", rows,
                       {agent(0, {0, 4}, {15, 3}, kYoungMale),
                        agent(1, {15, 4}, {0, 5}, kOldMale)},
                       "head-on around a central block"));
  }
  {
    auto rows = open_rows(15, 9);
    fill(rows, 7, 0, 7, 2);
    fill(rows, 7, 6, 7, 8);
    out.push_back(make("doorway", rows,
                       {agent(0, {0, 4}, {14, 3}, kYoungFemale),
                        agent(1, {14, 4}, {0, 5}, kOldMale)},
                       "opposite directions through a 3-cell doorway"));
  }
  {
    auto rows = open_rows(15, 11);
    fill(rows, 0, 5, 5, 10);
    fill(rows, 9, 5, 14, 10);
    out.push_back(make("t_junction", rows,
                       {agent(0, {0, 2}, {14, 2}, kYoungMale),
                        agent(1, {7, 10}, {0, 1}, kOldFemale)},
                       "one agent turns out of the stem into the bar"));
  }

  out.push_back(make("mixed_speed_crossing", open_rows(13, 13),
                     {agent(0, {0, 5}, {12, 7}, kYoungMale),
                      agent(1, {5, 12}, {7, 0}, kOldFemale)},
                     "crossing of a fast and a slow walker"));

  out.push_back(make("three_way_crossing", open_rows(14, 14),
                     {agent(0, {0, 6}, {13, 7}, kYoungMale),
                      agent(1, {7, 0}, {6, 13}, kOldMale),
                      agent(2, {13, 13}, {0, 0}, kYoungFemale)},
                     "three paths through the centre"));

  {
    auto rows = corridor_rows(18, 5);
    for (int x : {4, 9, 14}) rows[3][x] = '#';
    out.push_back(make("pillars", rows,
                       {agent(0, {0, 3}, {17, 2}, kOldFemale),
                        agent(1, {17, 3}, {0, 4}, kYoungMale)},
                       "head-on in a corridor with a row of pillars"));
  }
  {
    auto rows = open_rows(13, 13);
    fill(rows, 4, 0, 12, 8);
    out.push_back(make("corner", rows,
                       {agent(0, {12, 11}, {1, 0}, kYoungFemale),
                        agent(1, {2, 0}, {12, 10}, kOldMale)},
                       "opposite directions around an L-shaped corner"));
  }
  {
    auto rows = open_rows(15, 11);
    fill(rows, 7, 0, 7, 10);
    rows[2][7] = '.';
    rows[8][7] = '.';
    out.push_back(make("two_doors", rows,
                       {agent(0, {0, 5}, {14, 4}, kYoungMale),
                        agent(1, {14, 5}, {0, 6}, kYoungFemale)},
                       "a wall with two single-cell doors"));
  }
  return out;
}

Episode sample_episode(const Scenario& scenario, const ForecastResult& forecast,
                       std::mt19937_64& rng, int id, int fold,
                       int max_track_steps) {
  Episode e;
  e.id = id;
  e.fold = fold;
  for (std::size_t n = 0; n < scenario.agents.size(); ++n) {
    const AgentProfile& a = scenario.agents[n];
    const AgentForecast& f = forecast.agents.at(n);
    std::vector<double> priors;
    for (const auto& g : a.goals) priors.push_back(g.prior);
    std::discrete_distribution<int> pick(priors.begin(), priors.end());
    const int g = a.goals.size() == 1 ? 0 : pick(rng);
    const Cell goal = a.goals[g].cell;
    std::vector<Cell> states{a.start};
    while (states.back() != goal) {
      if (static_cast<int>(states.size()) > max_track_steps) {
        throw NumericalError("agent " + std::to_string(a.id) + " in '" +
                             scenario.name + "' did not reach its goal");
      }
      const int t = static_cast<int>(states.size()) - 1;
      const Policy& p = *f.policies[g][forecast.round_for_step(t)];
      const int action = sample_action(p.row(states.back()), rng);
      states.push_back(transition(scenario.map, states.back(), action));
    }
    e.tracks.push_back(trajectory_from_states(scenario.map, a.id, std::move(states)));
  }
  return e;
}

std::vector<EvalCase> synthetic_suite(const SuiteOptions& options) {
  if (options.episodes < 1 || options.folds < 1) {
    throw ValidationError("suite needs at least one episode and one fold");
  }
  const auto scenarios = synthetic_scenarios();
  const ThetaWeights theta = ground_truth_theta();
  std::vector<EvalCase> cases(scenarios.size());
  std::vector<std::exception_ptr> errors(scenarios.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    try {
      const Scenario& sc = scenarios[i];
      int reach = 0;
      for (const auto& a : sc.agents) {
        for (const auto& g : a.goals) {
          reach = std::max({reach, std::abs(g.cell.x - a.start.x),
                            std::abs(g.cell.y - a.start.y)});
        }
      }
      FPConfig cfg;
      cfg.horizon = 3 * reach;
      cfg.individual_speed = options.individual_speed;
      const ForecastResult f = run_fictitious_play(sc.map, sc.agents, theta, cfg);
      std::mt19937_64 rng(options.seed * 1000003ULL + i);
      cases[i].scenario = sc;
      for (int e = 0; e < options.episodes; ++e) {
        cases[i].episodes.push_back(sample_episode(sc, f, rng, e, e % options.folds,
                                                   options.max_track_steps));
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return cases;
}

std::vector<EvalCase> filter_folds(std::span<const EvalCase> cases,
                                   const std::function<bool(int)>& keep) {
  std::vector<EvalCase> out;
  for (const auto& c : cases) {
    EvalCase k;
    k.scenario = c.scenario;
    for (const auto& e : c.episodes) {
      if (keep(e.fold)) k.episodes.push_back(e);
    }
    if (!k.episodes.empty()) out.push_back(std::move(k));
  }
  return out;
}

DemonstrationSet build_demonstrations(std::span<const EvalCase> cases,
                                      const FeatureToggles& toggles,
                                      const FPConfig& config) {
  DemonstrationSet set;
  for (const auto& c : cases) {
    const Scenario& sc = c.scenario;
    PlaneCache cache(sc.map);
    const auto map = std::make_shared<const GridMap>(sc.map);
    PlanePtr region;
    if (toggles.collision_region) {
      std::vector<std::vector<Cell>> rays;
      const int horizon = std::max(c.longest_track(), 1);
      for (const auto& a : sc.agents) {
        rays.push_back(constant_velocity_ray(
            a, a.speed(config.speed_stats, config.constant_speed, config.individual_speed),
            horizon));
      }
      region = build_region_feature(sc.map, collision_region(sc.map, rays));
    }
    for (const auto& e : c.episodes) {
      std::vector<std::array<PlanePtr, 3>> social;
      if (toggles.social) {
        social = episode_social_planes(sc.map, e.tracks, config.kernels);
      }
      for (std::size_t k = 0; k < e.tracks.size(); ++k) {
        const Trajectory& t = e.tracks[k];
        t.validate(sc.map);
        const AgentProfile& a = sc.agent(t.agent_id);
        Demonstration d;
        d.trajectory = t;
        d.goal = t.states.back();
        d.fold = e.fold;
        d.map = map;
        PlaneSet planes = cache.agent_planes(t.states.front(), d.goal, a.orientation);
        if (toggles.social) planes.social = social[k];
        planes.collision_region = region;
        d.stack = assemble_stack(planes, toggles);
        set.demos.push_back(std::move(d));
      }
    }
  }
  return set;
}

}  // namespace fpf
