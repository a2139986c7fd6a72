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

#ifndef FPFORECAST_PLANNER_H_
#define FPFORECAST_PLANNER_H_

#include <span>
#include <vector>

#include "fpforecast/features.h"
#include "fpforecast/lattice.h"
#include "fpforecast/plane.h"

namespace fpf {

struct SoftVIOptions {
  int max_iter = 2000;
  double tol = 1e-6;
};

// Soft value tables for one goal. q is indexed cell * 9 + action; cells that
// cannot reach the goal keep V = -inf.
struct ValueTables {
  int width = 0;
  int height = 0;
  Cell goal;
  std::vector<double> q;
  std::vector<double> v;
  bool converged = false;
  int iterations_used = 0;
  // Sup-norm change of V after each sweep.
  std::vector<double> residuals;

  double value(Cell c) const { return v[static_cast<std::size_t>(c.y) * width + c.x]; }
  double q_value(Cell c, int a) const {
    return q[(static_cast<std::size_t>(c.y) * width + c.x) * kNumActions + a];
  }
};

// Stationary maxent policy pi(a|x) = exp(Q(x,a) - V(x)).
struct Policy {
  int width = 0;
  int height = 0;
  std::vector<double> probs;
  std::vector<double> source_theta;  // effective weights it was planned with
  int round = 0;

  double prob(Cell c, int a) const {
    return probs[(static_cast<std::size_t>(c.y) * width + c.x) * kNumActions + a];
  }
  std::span<const double> row(Cell c) const {
    return {probs.data() + (static_cast<std::size_t>(c.y) * width + c.x) *
                               kNumActions,
            kNumActions};
  }
};

struct VisitationField {
  std::vector<Plane> per_step;
  Plane cumulative;
};

// Soft value iteration with the goal absorbing (stay only, reward 0).
// Starts from V = 0 at the goal and -inf elsewhere, so after k sweeps V(x)
// is the log-partition over paths reaching the goal within k steps; the
// limit is the infinite-horizon log Z. Throws NumericalError for a
// non-negative or non-finite reward on a free non-goal cell, or when values
// blow up; returns with converged = false if max_iter is exhausted.
ValueTables soft_value_iteration(const GridMap& map, const Plane& reward,
                                 Cell goal, const SoftVIOptions& options = {},
                                 const std::vector<double>* warm_start = nullptr);

ValueTables soft_value_iteration(const GridMap& map, const FeatureStack& stack,
                                 std::span<const double> theta, Cell goal,
                                 const SoftVIOptions& options = {});

// Tables after exactly k sweeps for k = 1..horizon (element k-1 holds
// steps-to-go k). These define the finite-horizon maxent distribution over
// paths that reach the goal within `horizon` steps.
std::vector<ValueTables> finite_horizon_tables(const GridMap& map,
                                               const Plane& reward, Cell goal,
                                               int horizon);

// Throws NumericalError on non-converged tables unless allow_unconverged.
// Rows of cells with V = -inf put all mass on stay.
Policy compute_policy(const ValueTables& tables, bool allow_unconverged = false);

// D^(0) = d0, D^(l) = push-forward of D^(l-1) under the policy, l = 1..steps.
VisitationField propagate_visitation(const GridMap& map, const Policy& policy,
                                     const Plane& d0, int steps);

// Time-varying variant: step l uses policies[l-1].
VisitationField propagate_visitation(const GridMap& map,
                                     std::span<const Policy* const> policies,
                                     const Plane& d0);

// One push-forward step.
Plane push_forward(const GridMap& map, const Policy& policy, const Plane& d);

Plane point_mass(const GridMap& map, Cell c);

}  // namespace fpf

#endif  // FPFORECAST_PLANNER_H_
