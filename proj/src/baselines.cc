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

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>

#include "fpforecast/errors.h"

namespace fpf {

std::string_view model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kFP: return "fp";
    case ModelKind::kFPSpeed: return "fp-speed";
    case ModelKind::kNMDP: return "nmdp";
    case ModelKind::kMDPCV: return "mdpcv";
    case ModelKind::kMTA: return "mta";
  }
  return "?";
}

ModelKind model_from_name(std::string_view name) {
  for (ModelKind k : kAllModels) {
    if (model_name(k) == name) return k;
  }
  throw ValidationError("unknown model '" + std::string(name) +
                        "' (expected fp, fp-speed, nmdp, mdpcv or mta)");
}

FeatureToggles model_toggles(ModelKind kind, const FeatureToggles& base) {
  FeatureToggles t = base;
  switch (kind) {
    case ModelKind::kFP:
    case ModelKind::kFPSpeed:
      t.collision_region = false;
      break;
    case ModelKind::kNMDP:
      t.social = false;
      t.collision_region = false;
      break;
    case ModelKind::kMDPCV:
      t.social = false;
      t.collision_region = true;
      break;
    case ModelKind::kMTA:
      t = FeatureToggles{false, false, false, true, false};
      break;
  }
  return t;
}

namespace {

ForecastResult independent(const GridMap& map,
                           std::span<const AgentProfile> agents,
                           const ThetaWeights& theta, const FPConfig& config,
                           const FeatureToggles& toggles, PlanePtr extra) {
  config.validate();
  if (agents.empty()) throw ValidationError("no agents");
  const ThetaWeights w = theta.restrict_to(plane_order_for(toggles));
  const std::vector<double> eff = w.effective();
  PlaneCache cache(map);

  ForecastResult result;
  result.horizon = config.horizon;
  result.period = std::max(config.horizon, 1);
  result.rounds = 1;
  const int n_agents = static_cast<int>(agents.size());
  result.agents.resize(n_agents);

  struct Task {
    int agent;
    int goal;
    FeatureStack stack;
  };
  std::vector<Task> tasks;
  for (int n = 0; n < n_agents; ++n) {
    const AgentProfile& a = agents[n];
    a.validate(map);
    AgentForecast& out = result.agents[n];
    out.id = a.id;
    out.goals = a.goals;
    out.speed = a.speed(config.speed_stats, config.constant_speed,
                        config.individual_speed);
    out.macro_len = macro_length(config.window, out.speed);
    out.policies.assign(a.goals.size(), {});
    for (int g = 0; g < static_cast<int>(a.goals.size()); ++g) {
      PlaneSet planes = cache.agent_planes(a.start, a.goals[g].cell, a.orientation);
      planes.collision_region = extra;
      tasks.push_back({n, g, assemble_stack(planes, toggles)});
    }
  }

  std::vector<std::exception_ptr> errors(tasks.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const Task& t = tasks[k];
    try {
      result.agents[t.agent].policies[t.goal] = {std::make_shared<const Policy>(
          plan_policy(map, t.stack, eff, agents[t.agent].goals[t.goal].cell,
                      config.vi))};
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    if (!errors[k]) continue;
    const std::string where = "agent " + std::to_string(agents[tasks[k].agent].id);
    try {
      std::rethrow_exception(errors[k]);
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError(where + ": " + e.what());
    }
  }

  for (int n = 0; n < n_agents; ++n) {
    AgentForecast& out = result.agents[n];
    std::vector<double> priors;
    std::vector<Plane> current;
    for (const auto& g : agents[n].goals) {
      priors.push_back(g.prior);
      current.push_back(point_mass(map, agents[n].start));
    }
    out.per_step.reserve(config.horizon + 1);
    out.per_step.push_back(mix_goals(priors, current));
    for (int l = 0; l < config.horizon; ++l) {
      for (std::size_t g = 0; g < current.size(); ++g) {
        current[g] = push_forward(map, *out.policies[g][0], current[g]);
      }
      out.per_step.push_back(mix_goals(priors, current));
    }
    out.cumulative = Plane(map.width(), map.height());
    for (const auto& p : out.per_step) out.cumulative += p;
  }
  RoundLogEntry entry;
  entry.steps = config.horizon;
  entry.utility_updates = static_cast<int>(tasks.size());
  result.round_log.push_back(entry);
  return result;
}

Cell likeliest_goal(const AgentProfile& a) {
  const auto it = std::max_element(
      a.goals.begin(), a.goals.end(),
      [](const GoalHypothesis& x, const GoalHypothesis& y) { return x.prior < y.prior; });
  return it->cell;
}

}  // namespace

ForecastResult forecast_nmdp(const GridMap& map,
                             std::span<const AgentProfile> agents,
                             const ThetaWeights& theta, const FPConfig& config) {
  auto r = independent(map, agents, theta, config,
                       model_toggles(ModelKind::kNMDP, config.features), nullptr);
  r.model = "nmdp";
  return r;
}

std::vector<Cell> constant_velocity_ray(const AgentProfile& agent, double speed,
                                        int horizon) {
  if (!(speed > 0.0)) throw ValidationError("speed must be positive");
  if (agent.goals.empty()) throw ValidationError("agent has no goals");
  const Cell s = agent.start;
  const Cell g = likeliest_goal(agent);
  const double dx = g.x - s.x;
  const double dy = g.y - s.y;
  const double dist = std::hypot(dx, dy);
  std::vector<Cell> ray;
  ray.reserve(horizon + 1);
  for (int k = 0; k <= horizon; ++k) {
    const double travelled = k * speed;
    if (travelled >= dist) {
      ray.push_back(g);
      continue;
    }
    const double f = travelled / dist;
    ray.push_back({static_cast<int>(std::lround(s.x + f * dx)),
                   static_cast<int>(std::lround(s.y + f * dy))});
  }
  return ray;
}

std::vector<bool> collision_region(const GridMap& map,
                                   std::span<const std::vector<Cell>> rays) {
  std::vector<bool> region(map.num_cells(), false);
  auto mark = [&](Cell c) {
    if (map.in_bounds(c)) region[map.index(c)] = true;
  };
  for (std::size_t a = 0; a < rays.size(); ++a) {
    for (std::size_t b = a + 1; b < rays.size(); ++b) {
      const std::size_t steps = std::min(rays[a].size(), rays[b].size());
      for (std::size_t k = 0; k < steps; ++k) {
        const Cell p = rays[a][k];
        const Cell q = rays[b][k];
        if (std::max(std::abs(p.x - q.x), std::abs(p.y - q.y)) <= 1) {
          mark(p);
          mark(q);
        }
      }
    }
  }
  return region;
}

ForecastResult forecast_mdpcv(const GridMap& map,
                              std::span<const AgentProfile> agents,
                              const ThetaWeights& theta, const FPConfig& config) {
  std::vector<std::vector<Cell>> rays;
  for (const auto& a : agents) {
    a.validate(map);
    rays.push_back(constant_velocity_ray(
        a, a.speed(config.speed_stats, config.constant_speed, config.individual_speed),
        config.horizon));
  }
  PlanePtr region = build_region_feature(map, collision_region(map, rays));
  auto r = independent(map, agents, theta, config,
                       model_toggles(ModelKind::kMDPCV, config.features), region);
  r.model = "mdpcv";
  return r;
}

ForecastResult forecast_mta(const GridMap& map,
                            std::span<const AgentProfile> agents,
                            const ThetaWeights& theta, const FPConfig& config) {
  FPConfig c = config;
  c.features = model_toggles(ModelKind::kMTA, config.features);
  auto r = run_fictitious_play(map, agents,
                               theta.restrict_to(plane_order_for(c.features)), c);
  r.model = "mta";
  return r;
}

ForecastResult forecast(ModelKind kind, const GridMap& map,
                        std::span<const AgentProfile> agents,
                        const ThetaWeights& theta, const FPConfig& config,
                        bool mta_lookahead) {
  FPConfig c = config;
  switch (kind) {
    case ModelKind::kFP:
    case ModelKind::kFPSpeed: {
      c.individual_speed = kind == ModelKind::kFPSpeed;
      c.features = model_toggles(kind, config.features);
      auto r = run_fictitious_play(
          map, agents, theta.restrict_to(plane_order_for(c.features)), c);
      r.model = std::string(model_name(kind));
      return r;
    }
    case ModelKind::kNMDP:
      return forecast_nmdp(map, agents, theta, c);
    case ModelKind::kMDPCV:
      return forecast_mdpcv(map, agents, theta, c);
    case ModelKind::kMTA:
      c.lookahead = mta_lookahead;
      return forecast_mta(map, agents, theta, c);
  }
  throw ValidationError("unknown model");
}

}  // namespace fpf
