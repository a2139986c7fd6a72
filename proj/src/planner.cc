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

#include "fpforecast/planner.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fpforecast/errors.h"
#include "fpforecast/kernels.h"

namespace fpf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// exp() overflows past ~709; a log-partition this large means the path sum
// diverges.
constexpr double kDivergenceBound = 700.0;
constexpr double kMassTol = 1e-9;

void check_rewards(const GridMap& map, const Plane& reward, Cell goal) {
  if (reward.width() != map.width() || reward.height() != map.height()) {
    throw ValidationError("reward plane size does not match the grid");
  }
  const int goal_index = map.index(goal);
  for (int i : map.free_cells()) {
    if (i == goal_index) continue;
    const double r = reward[i];
    if (!std::isfinite(r) || r >= 0.0) {
      throw NumericalError("soft value iteration needs strictly negative finite "
                           "rewards; got " + std::to_string(r) + " at " +
                           to_string(map.cell(i)));
    }
  }
}

ValueTables empty_tables(const GridMap& map, Cell goal) {
  ValueTables t;
  t.width = map.width();
  t.height = map.height();
  t.goal = goal;
  t.q.assign(static_cast<std::size_t>(map.num_cells()) * kNumActions, kNegInf);
  t.v.assign(map.num_cells(), kNegInf);
  t.v[map.index(goal)] = 0.0;
  return t;
}

void check_distribution(const GridMap& map, const Plane& d) {
  if (d.width() != map.width() || d.height() != map.height()) {
    throw ValidationError("distribution size does not match the grid");
  }
  double total = 0.0;
  for (int i = 0; i < map.num_cells(); ++i) {
    const double v = d[i];
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError("distribution has a negative or non-finite entry");
    }
    if (v > 0.0 && map.obstacle_mask()[i]) {
      throw ValidationError("distribution has mass on an obstacle");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > kMassTol) {
    throw ValidationError("distribution mass is " + std::to_string(total) +
                          ", expected 1");
  }
}

}  // namespace

ValueTables soft_value_iteration(const GridMap& map, const Plane& reward,
                                 Cell goal, const SoftVIOptions& options,
                                 const std::vector<double>* warm_start) {
  map.require_free(goal, "goal");
  if (!(options.tol > 0.0)) throw ValidationError("tol must be positive");
  if (options.max_iter < 1) throw ValidationError("max_iter must be >= 1");
  check_rewards(map, reward, goal);

  ValueTables t = empty_tables(map, goal);
  const int goal_index = map.index(goal);
  if (warm_start != nullptr && warm_start->size() == t.v.size()) {
    for (int i : map.free_cells()) t.v[i] = (*warm_start)[i];
    t.v[goal_index] = 0.0;
  }
  std::vector<double> next = t.v;
  for (int it = 1; it <= options.max_iter; ++it) {
    const double diff = kernels::soft_bellman_sweep(
        map, reward.values(), goal_index, t.v, t.q, next);
    t.v.swap(next);
    t.residuals.push_back(diff);
    t.iterations_used = it;
    double vmax = kNegInf;
    for (int i : map.free_cells()) vmax = std::max(vmax, t.v[i]);
    if (!(vmax < kDivergenceBound)) {
      throw NumericalError(
          "soft value iteration diverged (path sum unbounded) after " +
          std::to_string(it) + " sweeps");
    }
    if (diff < options.tol) {
      t.converged = true;
      break;
    }
  }
  return t;
}

ValueTables soft_value_iteration(const GridMap& map, const FeatureStack& stack,
                                 std::span<const double> theta, Cell goal,
                                 const SoftVIOptions& options) {
  return soft_value_iteration(map, stack.reward(theta), goal, options);
}

std::vector<ValueTables> finite_horizon_tables(const GridMap& map,
                                               const Plane& reward, Cell goal,
                                               int horizon) {
  map.require_free(goal, "goal");
  if (horizon < 0) throw ValidationError("horizon must be >= 0");
  check_rewards(map, reward, goal);
  std::vector<ValueTables> out;
  out.reserve(horizon);
  ValueTables t = empty_tables(map, goal);
  std::vector<double> next = t.v;
  for (int k = 1; k <= horizon; ++k) {
    const double diff = kernels::soft_bellman_sweep(
        map, reward.values(), map.index(goal), t.v, t.q, next);
    t.v.swap(next);
    t.residuals.push_back(diff);
    t.iterations_used = k;
    t.converged = true;
    out.push_back(t);
  }
  return out;
}

Policy compute_policy(const ValueTables& tables, bool allow_unconverged) {
  if (!tables.converged && !allow_unconverged) {
    throw NumericalError("soft value iteration did not converge after " +
                         std::to_string(tables.iterations_used) + " sweeps");
  }
  Policy p;
  p.width = tables.width;
  p.height = tables.height;
  const std::size_t n = tables.v.size();
  p.probs.assign(n * kNumActions, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = p.probs.data() + i * kNumActions;
    const double v = tables.v[i];
    if (v == kNegInf) {
      row[kStay] = 1.0;
      continue;
    }
    for (int a = 0; a < kNumActions; ++a) {
      row[a] = std::exp(tables.q[i * kNumActions + a] - v);
    }
  }
  return p;
}

Plane push_forward(const GridMap& map, const Policy& policy, const Plane& d) {
  Plane out(map.width(), map.height());
  kernels::push_forward(map, policy.probs, d.values(), out.values());
  return out;
}

VisitationField propagate_visitation(const GridMap& map, const Policy& policy,
                                     const Plane& d0, int steps) {
  if (steps < 0) throw ValidationError("step count must be >= 0");
  check_distribution(map, d0);
  VisitationField f;
  f.per_step.reserve(steps + 1);
  f.per_step.push_back(d0);
  f.cumulative = d0;
  for (int l = 1; l <= steps; ++l) {
    f.per_step.push_back(push_forward(map, policy, f.per_step.back()));
    f.cumulative += f.per_step.back();
  }
  return f;
}

VisitationField propagate_visitation(const GridMap& map,
                                     std::span<const Policy* const> policies,
                                     const Plane& d0) {
  check_distribution(map, d0);
  VisitationField f;
  f.per_step.reserve(policies.size() + 1);
  f.per_step.push_back(d0);
  f.cumulative = d0;
  for (const Policy* p : policies) {
    f.per_step.push_back(push_forward(map, *p, f.per_step.back()));
    f.cumulative += f.per_step.back();
  }
  return f;
}

Plane point_mass(const GridMap& map, Cell c) {
  map.require_free(c, "cell");
  Plane p(map.width(), map.height());
  p(c.x, c.y) = 1.0;
  return p;
}

}  // namespace fpf
