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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>

#include "fpforecast/errors.h"

namespace fpf {

void SpeedStats::validate() const {
  for (double v : {young, old, male, female}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError("speed stats must be positive");
    }
  }
}

double individualize_speed(const AttributeWeights& w, const SpeedStats& stats) {
  stats.validate();
  const double ws[4] = {w.male, w.female, w.old, w.young};
  const double vs[4] = {stats.male, stats.female, stats.old, stats.young};
  double total = 0.0;
  for (double x : ws) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw ValidationError("attribute weights must lie in [0, 1]");
    }
    total += x;
  }
  if (!(total > 0.0)) throw ValidationError("attribute weights are all zero");
  double v = 0.0;
  for (int i = 0; i < 4; ++i) v += ws[i] * vs[i];
  return v / total;
}

int macro_length(int window, double speed) {
  if (window < 1) throw ValidationError("window must be >= 1");
  if (!(speed > 0.0) || !std::isfinite(speed)) {
    throw ValidationError("speed must be positive");
  }
  return std::max(1, static_cast<int>(std::floor(window * speed + 0.5)));
}

void AgentProfile::validate(const GridMap& map) const {
  const std::string who = "agent " + std::to_string(id);
  map.require_free(start, who + " start");
  if (goals.empty()) throw ValidationError(who + " has no goals");
  double total = 0.0;
  for (const auto& g : goals) {
    map.require_free(g.cell, who + " goal");
    if (!(g.prior >= 0.0) || !std::isfinite(g.prior)) {
      throw ValidationError(who + " has a negative goal prior");
    }
    total += g.prior;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ValidationError(who + " goal priors sum to " + std::to_string(total));
  }
  if (orientation && !std::isfinite(*orientation)) {
    throw ValidationError(who + " orientation is not finite");
  }
}

double AgentProfile::speed(const SpeedStats& stats, double constant,
                           bool individualize) const {
  if (individualize && attributes) return individualize_speed(*attributes, stats);
  return constant;
}

void FPConfig::validate() const {
  if (window < 1) throw ValidationError("W must be >= 1");
  if (period < 1) throw ValidationError("tau must be >= 1");
  if (horizon < period) throw ValidationError("T must be >= tau");
  if (!(constant_speed > 0.0)) throw ValidationError("constant speed must be > 0");
  speed_stats.validate();
  if (!features.any()) throw ValidationError("no features enabled");
}

int FPConfig::rounds() const { return (horizon + period - 1) / period; }

int ForecastResult::round_for_step(int t) const {
  return std::clamp(t / std::max(period, 1), 0, std::max(rounds - 1, 0));
}

FeatureStack static_stack(PlaneCache& cache, const AgentProfile& agent,
                          Cell goal, const FeatureToggles& toggles) {
  return assemble_stack(cache.agent_planes(agent.start, goal, agent.orientation),
                        toggles);
}

Policy plan_policy(const GridMap& map, const FeatureStack& stack,
                   std::span<const double> theta, Cell goal,
                   const SoftVIOptions& vi) {
  Policy p = compute_policy(soft_value_iteration(map, stack, theta, goal, vi));
  p.source_theta.assign(theta.begin(), theta.end());
  return p;
}

Policy update_empirical(const GridMap& map, const FeatureStack& stack_m,
                        const ThetaWeights& theta, Cell goal,
                        const SoftVIOptions& vi) {
  theta.check_matches(stack_m);
  return plan_policy(map, stack_m, theta.effective(), goal, vi);
}

Policy update_utility(const GridMap& map, const FeatureStack& static_stack_n,
                      const std::array<PlanePtr, 3>& social,
                      const ThetaWeights& theta, Cell goal,
                      const SoftVIOptions& vi) {
  const FeatureStack stack = static_stack_n.with_social(social);
  theta.check_matches(stack);
  return plan_policy(map, stack, theta.effective(), goal, vi);
}

VisitationField take_macro_action(const GridMap& map, const Policy& policy,
                                  const Plane& d_prev, int macro_len) {
  if (macro_len < 1) throw ValidationError("macro-action length must be >= 1");
  return propagate_visitation(map, policy, d_prev, macro_len);
}

Plane mix_goals(std::span<const double> priors, std::span<const Plane> parts) {
  if (parts.empty() || parts.size() != priors.size()) {
    throw ValidationError("goal mixture needs one plane per prior");
  }
  Plane out(parts[0].width(), parts[0].height());
  for (std::size_t g = 0; g < parts.size(); ++g) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += priors[g] * parts[g][i];
  }
  return out;
}

namespace {

// Occupancy one other agent contributes.
Plane predicted_occupancy(const GridMap& map, const OtherAgentState& m,
                          bool lookahead) {
  if (m.current.empty() || m.current.size() != m.priors.size() ||
      m.policies.size() != m.priors.size()) {
    throw ValidationError("missing prior distribution for another agent");
  }
  if (!lookahead) return mix_goals(m.priors, m.current);
  std::vector<Plane> sums;
  sums.reserve(m.current.size());
  for (std::size_t g = 0; g < m.current.size(); ++g) {
    Plane d = m.current[g];
    Plane sum(map.width(), map.height());
    for (int l = 0; l < m.macro_len; ++l) {
      d = push_forward(map, *m.policies[g], d);
      sum += d;
    }
    sums.push_back(std::move(sum));
  }
  return mix_goals(m.priors, sums);
}

[[noreturn]] void rethrow_with_context(std::exception_ptr e,
                                       const std::string& where) {
  try {
    std::rethrow_exception(e);
  } catch (const ValidationError& err) {
    throw ValidationError(where + ": " + err.what());
  } catch (const NumericalError& err) {
    throw NumericalError(where + ": " + err.what());
  }
}

struct AgentState {
  std::vector<double> priors;
  std::vector<Cell> goals;
  std::vector<FeatureStack> stacks;  // zero social planes
  std::vector<Plane> current;        // per goal, at the committed time
  std::vector<PolicyPtr> mu;         // latest policy per goal
  int macro_len = 1;
};

}  // namespace

Plane encode_to_feature(const GridMap& map,
                        std::span<const OtherAgentState> others,
                        bool lookahead) {
  Plane occ(map.width(), map.height());
  for (const auto& m : others) occ += predicted_occupancy(map, m, lookahead);
  return occ;
}

ForecastResult run_fictitious_play(const GridMap& map,
                                   std::span<const AgentProfile> agents,
                                   const ThetaWeights& theta,
                                   const FPConfig& config) {
  config.validate();
  if (agents.empty()) throw ValidationError("no agents");
  if (theta.plane_order != plane_order_for(config.features)) {
    throw ValidationError("weight planes do not match the enabled features");
  }
  const std::vector<double> eff = theta.effective();
  const bool social = config.features.social;
  const int n_agents = static_cast<int>(agents.size());
  const int rounds = config.rounds();

  PlaneCache cache(map);
  ForecastResult result;
  result.horizon = config.horizon;
  result.period = config.period;
  result.rounds = rounds;
  std::vector<AgentState> st(n_agents);
  result.agents.resize(n_agents);
  for (int n = 0; n < n_agents; ++n) {
    const AgentProfile& a = agents[n];
    a.validate(map);
    AgentState& s = st[n];
    AgentForecast& out = result.agents[n];
    out.id = a.id;
    out.goals = a.goals;
    out.speed = a.speed(config.speed_stats, config.constant_speed,
                        config.individual_speed);
    out.macro_len = macro_length(config.window, out.speed);
    s.macro_len = out.macro_len;
    for (const auto& g : a.goals) {
      s.priors.push_back(g.prior);
      s.goals.push_back(g.cell);
      s.stacks.push_back(static_stack(cache, a, g.cell, config.features));
      s.current.push_back(point_mass(map, a.start));
    }
    s.mu.resize(a.goals.size());
    out.policies.assign(a.goals.size(), {});
    out.per_step.reserve(config.horizon + 1);
    out.per_step.push_back(mix_goals(s.priors, s.current));
  }
  for (int n = 0; n < n_agents; ++n) {
    for (int m = n + 1; m < n_agents; ++m) {
      if (agents[n].id == agents[m].id) {
        throw ValidationError("duplicate agent id " + std::to_string(agents[n].id));
      }
    }
  }

  // (agent, goal) pairs flattened for parallel solves.
  std::vector<std::pair<int, int>> tasks;
  for (int n = 0; n < n_agents; ++n) {
    for (int g = 0; g < static_cast<int>(st[n].goals.size()); ++g) {
      tasks.emplace_back(n, g);
    }
  }
  auto solve = [&](std::span<const std::pair<int, int>> which,
                   const auto& stack_of, int round) {
    std::vector<std::exception_ptr> errors(which.size());
    std::vector<PolicyPtr> out(which.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t k = 0; k < which.size(); ++k) {
      const auto [n, g] = which[k];
      try {
        out[k] = std::make_shared<const Policy>(
            plan_policy(map, stack_of(n, g), eff, st[n].goals[g], config.vi));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
    for (std::size_t k = 0; k < which.size(); ++k) {
      if (errors[k]) {
        rethrow_with_context(errors[k],
                             "round " + std::to_string(round) + ", agent " +
                                 std::to_string(agents[which[k].first].id));
      }
    }
    return out;
  };
  auto static_of = [&](int n, int g) -> const FeatureStack& {
    return st[n].stacks[g];
  };
  auto by_agent = [&](const std::vector<PolicyPtr>& pols) {
    std::vector<std::vector<PolicyPtr>> out(n_agents);
    for (std::size_t k = 0; k < tasks.size(); ++k) {
      out[tasks[k].first].push_back(pols[k]);
    }
    return out;
  };

  // Round-0 beliefs about the others: their social-free policies.
  if (social && n_agents > 1) {
    auto mu0 = solve(tasks, static_of, 0);
    for (std::size_t k = 0; k < tasks.size(); ++k) {
      st[tasks[k].first].mu[tasks[k].second] = mu0[k];
    }
  }

  std::vector<int> order(n_agents);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return agents[a].id < agents[b].id;
  });
  std::mt19937_64 rng(config.seed);
  SocialNormalizer normalizer;
  const ProxemicKernels& kernels = config.kernels;

  auto other_state = [&](int m, const std::vector<Plane>& at_start) {
    OtherAgentState o;
    o.priors = st[m].priors;
    o.current = at_start;
    for (const auto& p : st[m].mu) o.policies.push_back(p.get());
    o.macro_len = st[m].macro_len;
    return o;
  };

  for (int r = 0; r < rounds; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const int start = r * config.period;
    const int steps = std::min(config.period, config.horizon - start);
    if (config.sweep == SweepOrder::kRandom) {
      std::shuffle(order.begin(), order.end(), rng);
    }
    std::vector<std::vector<Plane>> at_start(n_agents);
    for (int n = 0; n < n_agents; ++n) at_start[n] = st[n].current;

    // occupancy[m]: what m is predicted to occupy, from its current mu.
    std::vector<Plane> occupancy(n_agents);
    auto refresh_occupancy = [&](std::span<const int> which) {
      std::vector<std::exception_ptr> errors(which.size());
#pragma omp parallel for schedule(dynamic)
      for (std::size_t k = 0; k < which.size(); ++k) {
        try {
          const int m = which[k];
          const OtherAgentState o = other_state(m, at_start[m]);
          occupancy[m] = predicted_occupancy(map, o, config.lookahead);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
      for (std::size_t k = 0; k < which.size(); ++k) {
        if (errors[k]) {
          rethrow_with_context(errors[k],
                               "round " + std::to_string(r) + ", agent " +
                                   std::to_string(agents[which[k]].id));
        }
      }
    };
    auto social_for = [&](int n) {
      Plane occ(map.width(), map.height());
      for (int m : order) {
        if (m != n) occ += occupancy[m];
      }
      return occ;
    };

    int updates = 0;
    auto commit = [&](int n, const std::vector<PolicyPtr>& pols) {
      AgentState& s = st[n];
      AgentForecast& out = result.agents[n];
      for (std::size_t g = 0; g < pols.size(); ++g) {
        s.mu[g] = pols[g];
        out.policies[g].push_back(pols[g]);
      }
      // Only the first tau steps of the macro-action are committed; the
      // rest would be discarded, so they are not computed.
      for (int l = 0; l < steps; ++l) {
        for (std::size_t g = 0; g < pols.size(); ++g) {
          s.current[g] = push_forward(map, *pols[g], s.current[g]);
        }
        out.per_step.push_back(mix_goals(s.priors, s.current));
      }
    };

    if (!social || n_agents == 1) {
      const auto pols = by_agent(solve(tasks, static_of, r));
      if (social) {
        for (int n = 0; n < n_agents; ++n) {
          result.agents[n].social_occupancy.emplace_back(map.width(), map.height());
        }
      }
      for (int n : order) commit(n, pols[n]);
      updates = static_cast<int>(tasks.size());
    } else {
      refresh_occupancy(order);
      auto social_stacks = [&](int n, const Plane& occ) {
        const auto planes = normalizer.apply(
            build_social_planes(occ, kernels, map.cell_size()));
        std::vector<FeatureStack> out;
        for (const auto& s : st[n].stacks) out.push_back(s.with_social(planes));
        return out;
      };
      if (r == 0) {
        std::vector<std::array<Plane, 3>> raw;
        for (int n = 0; n < n_agents; ++n) {
          raw.push_back(build_social_planes(social_for(n), kernels, map.cell_size()));
        }
        normalizer = SocialNormalizer::from_max(raw);
        result.social_divisors = normalizer.divisors();
      }

      if (!config.gauss_seidel) {
        // Every agent reacts to the previous round's beliefs, so the
        // updates are independent.
        std::vector<std::vector<FeatureStack>> stacks(n_agents);
        for (int n = 0; n < n_agents; ++n) {
          Plane occ = social_for(n);
          stacks[n] = social_stacks(n, occ);
          result.agents[n].social_occupancy.push_back(std::move(occ));
        }
        const auto pols = by_agent(solve(
            tasks,
            [&](int n, int g) -> const FeatureStack& { return stacks[n][g]; },
            r));
        for (int n : order) commit(n, pols[n]);
        updates = static_cast<int>(tasks.size());
      } else {
        for (int n : order) {
          Plane occ = social_for(n);
          const auto stacks = social_stacks(n, occ);
          result.agents[n].social_occupancy.push_back(std::move(occ));
          std::vector<std::pair<int, int>> mine;
          for (int g = 0; g < static_cast<int>(stacks.size()); ++g) {
            mine.emplace_back(n, g);
          }
          const auto pols = solve(
              mine,
              [&](int, int g) -> const FeatureStack& { return stacks[g]; }, r);
          updates += static_cast<int>(pols.size());
          commit(n, pols);
          const int which[1] = {n};
          refresh_occupancy(which);
        }
      }
    }

    RoundLogEntry entry;
    entry.round = r;
    entry.start_step = start;
    entry.steps = steps;
    entry.utility_updates = updates;
    entry.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    result.round_log.push_back(entry);
  }

  for (auto& a : result.agents) {
    a.cumulative = Plane(map.width(), map.height());
    for (const auto& p : a.per_step) a.cumulative += p;
  }
  result.model = social ? "fp" : "fp-nosoc";
  return result;
}

}  // namespace fpf
