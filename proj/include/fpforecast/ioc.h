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

#ifndef FPFORECAST_IOC_H_
#define FPFORECAST_IOC_H_

#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fpforecast/features.h"
#include "fpforecast/lattice.h"
#include "fpforecast/planner.h"

namespace fpf {

// theta_j = -exp(raw_j), one entry per plane in plane_order.
struct ThetaWeights {
  std::vector<FeatureKind> plane_order;
  std::vector<double> raw;

  static ThetaWeights zeros(std::vector<FeatureKind> order);
  static ThetaWeights from_effective(std::vector<FeatureKind> order,
                                     std::span<const double> effective);

  std::vector<double> effective() const;
  bool has(FeatureKind kind) const;
  // Weights for a sub-order; throws ValidationError if a plane is missing.
  ThetaWeights restrict_to(const std::vector<FeatureKind>& order) const;
  // Throws ValidationError unless plane_order matches the stack.
  void check_matches(const FeatureStack& stack) const;
};

struct Demonstration {
  Trajectory trajectory;
  Cell goal;
  FeatureStack stack;
  int fold = 0;
  // Lattice of this demo; null means the map passed to the IOC functions.
  std::shared_ptr<const GridMap> map;
};

struct DemonstrationSet {
  std::vector<Demonstration> demos;

  // Non-empty, shared plane order, every track valid and ending at its goal.
  void validate(const GridMap& map) const;
  // Same, for sets where every demo carries its own map.
  void validate() const;
  std::vector<FeatureKind> plane_order() const;
  DemonstrationSet with_fold(int fold) const;
  DemonstrationSet without_fold(int fold) const;
};

// How the model distribution over paths is truncated.
enum class HorizonMode {
  // Stationary policy, propagated until the non-goal mass is negligible.
  kUntilAbsorbed,
  // Stationary policy, propagated for each demo's own length.
  kDemoLength,
  // Exact maxent over paths reaching the goal within fixed_horizon steps
  // (time-varying policy).
  kFixed,
};

enum class Optimizer {
  kExponentiatedGradient,
  // Quasi-Newton on the raw weights with Armijo backtracking. Useful when
  // planes are strongly correlated and the EG steps zigzag.
  kLbfgs,
};

struct TrainConfig {
  Optimizer optimizer = Optimizer::kExponentiatedGradient;
  double lr = 0.05;
  int max_epochs = 300;
  double tol = 1e-2;
  HorizonMode horizon = HorizonMode::kUntilAbsorbed;
  int fixed_horizon = 0;
  SoftVIOptions vi;
  double absorb_tol = 1e-12;
  int max_propagation_steps = 20000;
  // Halve the step when log-likelihood drops or soft VI fails.
  bool backtrack = true;
  // Step multiplier after an accepted step, capped at max_lr.
  double lr_growth = 1.2;
  double max_lr = 2.0;
  // Reuse each group's last V as the starting point of the next solve.
  bool warm_start = true;
  std::vector<double> initial_raw;
  int lbfgs_memory = 8;
  // Largest change of any raw weight in one L-BFGS step.
  double lbfgs_max_step = 1.0;
  // Ceiling on the effective bias weight when the bias plane leads the
  // stack. Just under -log 9 every reward stays below -log 9, so the
  // stationary backup contracts for any other planes, social or none.
  std::optional<double> max_bias = -2.25;
};

struct TrainReport {
  int iterations = 0;
  // Sup norm of the gradient with the bound-blocked bias component zeroed.
  double final_gradient_norm = 0.0;
  std::vector<double> per_feature_match;
  std::vector<double> empirical;
  std::vector<double> expected;
  bool converged = false;
  bool diverged = false;
  double final_lr = 0.0;
  int rejected_steps = 0;
  std::vector<double> log_likelihood_trace;
  std::vector<double> gradient_norm_trace;
  // Raw weights after each accepted step (the initial point first).
  std::vector<std::vector<double>> raw_trace;
  std::string message;
};

struct TrainResult {
  ThetaWeights theta;
  TrainReport report;
};

// Sum of f over the non-goal states of a track (the goal is absorbing with
// zero reward).
std::vector<double> trajectory_feature_counts(const FeatureStack& stack,
                                              const Trajectory& t, Cell goal);

// Mean over demos of trajectory_feature_counts.
std::vector<double> empirical_feature_counts(const DemonstrationSet& demos);

struct ModelStatistics {
  std::vector<double> expected;  // mean expected counts
  double mean_log_z = 0.0;       // mean of log Z(start)
  double log_likelihood = 0.0;   // mean of theta . f(demo) - log Z(start)
};

// Expected counts and likelihood under effective weights. Throws
// NumericalError naming the demo when soft VI fails.
ModelStatistics model_statistics(const GridMap& map,
                                 const DemonstrationSet& demos,
                                 std::span<const double> theta,
                                 const TrainConfig& config = {});

std::vector<double> expected_feature_counts(const GridMap& map,
                                            const ThetaWeights& theta,
                                            const DemonstrationSet& demos,
                                            const TrainConfig& config = {});

double log_likelihood(const GridMap& map, const ThetaWeights& theta,
                      const DemonstrationSet& demos,
                      const TrainConfig& config = {});

// Maxent IOC. Default update is exponentiated gradient:
// raw <- raw - lr (empirical - expected).
TrainResult train(const GridMap& map, const DemonstrationSet& demos,
                  const TrainConfig& config = {});
// Every demo must carry its map.
TrainResult train(const DemonstrationSet& demos, const TrainConfig& config = {});

// Social planes for a training demo from the other agents' observed tracks:
// each track spreads mass 1/len over its cells, the sum is smoothed by the
// proxemic kernels and divided by its own per-radius maximum.
std::array<PlanePtr, 3> observed_social_planes(
    const GridMap& map, std::span<const Trajectory> others,
    const ProxemicKernels& kernels = {});

// observed_social_planes for every track of an episode (others = the rest),
// with one per-radius divisor shared by the episode: the maximum over all
// its tracks' raw planes.
std::vector<std::array<PlanePtr, 3>> episode_social_planes(
    const GridMap& map, std::span<const Trajectory> tracks,
    const ProxemicKernels& kernels = {});

// Rollout of a stationary policy until the goal or max_steps. The track is
// returned either way; callers check whether it ended at the goal.
Trajectory sample_trajectory(const GridMap& map, const Policy& policy,
                             Cell start, Cell goal, int max_steps,
                             std::mt19937_64& rng, int agent_id = 0);

// Draws an action index from a policy row.
int sample_action(std::span<const double> row, std::mt19937_64& rng);

}  // namespace fpf

#endif  // FPFORECAST_IOC_H_
