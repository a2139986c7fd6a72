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

#ifndef FPFORECAST_FORECASTER_H_
#define FPFORECAST_FORECASTER_H_

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fpforecast/features.h"
#include "fpforecast/ioc.h"
#include "fpforecast/lattice.h"
#include "fpforecast/planner.h"

namespace fpf {

// Average walking speed per visual attribute, in cells per frame.
struct SpeedStats {
  double young = 1.98;
  double old = 1.25;
  double male = 1.78;
  double female = 1.53;

  void validate() const;
  bool operator==(const SpeedStats&) const = default;
};

// Soft attribute scores in [0, 1]; they need not sum to one.
struct AttributeWeights {
  double male = 0.0;
  double female = 0.0;
  double old = 0.0;
  double young = 0.0;

  bool operator==(const AttributeWeights&) const = default;
};

// Weights normalized to sum 1, dotted with the stats.
double individualize_speed(const AttributeWeights& w, const SpeedStats& stats);

// max(1, round-half-up(window * speed)).
int macro_length(int window, double speed);

struct GoalHypothesis {
  Cell cell;
  double prior = 1.0;
  bool operator==(const GoalHypothesis&) const = default;
};

struct AgentProfile {
  int id = 0;
  Cell start;
  std::vector<GoalHypothesis> goals;
  std::optional<double> orientation;
  std::optional<AttributeWeights> attributes;

  // Throws ValidationError naming the agent.
  void validate(const GridMap& map) const;
  // Individualized speed when `individualize` and attributes are present,
  // otherwise the constant fallback.
  double speed(const SpeedStats& stats, double constant,
               bool individualize) const;
};

enum class SweepOrder { kAscendingId, kRandom };

struct FPConfig {
  int window = 3;       // W
  int period = 1;       // tau
  int horizon = 30;     // T
  double constant_speed = 1.0;
  bool individual_speed = false;
  SpeedStats speed_stats;
  FeatureToggles features;
  SweepOrder sweep = SweepOrder::kAscendingId;
  std::uint64_t seed = 0;
  // Later agents in a sweep see the round-t policies of earlier ones.
  bool gauss_seidel = false;
  // Others' occupancy is predicted over their macro-action. Without
  // lookahead it is their current distribution only.
  bool lookahead = true;
  ProxemicKernels kernels;
  SoftVIOptions vi;

  void validate() const;
  // ceil(horizon / period)
  int rounds() const;
};

struct RoundLogEntry {
  int round = 0;
  int start_step = 0;
  int steps = 0;
  // Soft VI solves (one per agent per goal hypothesis).
  int utility_updates = 0;
  double wall_ms = 0.0;  // not serialized
};

using PolicyPtr = std::shared_ptr<const Policy>;

struct AgentForecast {
  int id = 0;
  double speed = 0.0;
  int macro_len = 1;
  std::vector<GoalHypothesis> goals;
  // Committed D^(0..T), mixed over goal hypotheses by prior.
  std::vector<Plane> per_step;
  Plane cumulative;
  // policies[g][r]: goal hypothesis g in round r.
  std::vector<std::vector<PolicyPtr>> policies;
  // Social occupancy (before smoothing) seen in each round.
  std::vector<Plane> social_occupancy;
};

struct ForecastResult {
  std::string model;
  int horizon = 0;
  int period = 1;
  int rounds = 0;
  std::vector<AgentForecast> agents;
  std::vector<RoundLogEntry> round_log;
  std::array<double, 3> social_divisors{1.0, 1.0, 1.0};

  // Round whose policy acts at time step t (clamped to the last round).
  int round_for_step(int t) const;
};

// Prior-weighted sum of per-goal planes. Every forecaster mixes through this
// so that identical inputs give bit-identical outputs.
Plane mix_goals(std::span<const double> priors, std::span<const Plane> parts);

// Static planes and stack for one agent and goal with zero social planes.
FeatureStack static_stack(PlaneCache& cache, const AgentProfile& agent,
                          Cell goal, const FeatureToggles& toggles);

// Soft VI + policy for one stack. Throws NumericalError on non-convergence.
Policy plan_policy(const GridMap& map, const FeatureStack& stack,
                   std::span<const double> theta, Cell goal,
                   const SoftVIOptions& vi);

// mu_m for agent m given its current stack (social planes from the previous
// round's forecasts of the others).
Policy update_empirical(const GridMap& map, const FeatureStack& stack_m,
                        const ThetaWeights& theta, Cell goal,
                        const SoftVIOptions& vi = {});

// Sum over others of their predicted occupancy: each other agent m spreads
// D_m^(t) through mu_m for L_m steps and contributes the sum of the L_m
// propagated planes. With lookahead off, D_m^(t) itself is used.
struct OtherAgentState {
  // Per goal hypothesis: prior, current distribution and policy.
  std::vector<double> priors;
  std::vector<Plane> current;
  std::vector<const Policy*> policies;
  int macro_len = 1;
};
Plane encode_to_feature(const GridMap& map,
                        std::span<const OtherAgentState> others,
                        bool lookahead = true);

// U_n for the round: n's stack with new social planes, then soft VI.
Policy update_utility(const GridMap& map, const FeatureStack& static_stack_n,
                      const std::array<PlanePtr, 3>& social,
                      const ThetaWeights& theta, Cell goal,
                      const SoftVIOptions& vi = {});

// D^(t..t+L) from D^(t) under the round policy.
VisitationField take_macro_action(const GridMap& map, const Policy& policy,
                                  const Plane& d_prev, int macro_len);

// Multi-agent fictitious play. theta's plane order must match the stack
// built from config.features.
ForecastResult run_fictitious_play(const GridMap& map,
                                   std::span<const AgentProfile> agents,
                                   const ThetaWeights& theta,
                                   const FPConfig& config);

}  // namespace fpf

#endif  // FPFORECAST_FORECASTER_H_
