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

#ifndef FPFORECAST_SUITE_H_
#define FPFORECAST_SUITE_H_

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fpforecast/forecaster.h"
#include "fpforecast/ioc.h"
#include "fpforecast/scenario.h"

namespace fpf {

// Map from rows of '#' (obstacle) and '.' (free); row 0 is y = 0.
GridMap map_from_ascii(std::span<const std::string> rows, double cell_size = 0.4);

// Weights the synthetic demonstrations are drawn from, over all planes of
// FeatureToggles{} (bias, occupancy, distance, orientation, three social).
ThetaWeights ground_truth_theta();

// The 16 scripted interaction scenarios.
std::vector<Scenario> synthetic_scenarios();

struct SuiteOptions {
  std::uint64_t seed = 0;
  int episodes = 10;
  int folds = 5;
  int max_track_steps = 400;
  // Generating agents plan with attribute speeds rather than the constant.
  bool individual_speed = true;
};

// Tracks drawn from the forecast's time-varying policies (the last round's
// policy after the horizon) until each agent reaches its goal. Goal
// hypotheses are drawn by prior.
Episode sample_episode(const Scenario& scenario, const ForecastResult& forecast,
                       std::mt19937_64& rng, int id, int fold,
                       int max_track_steps = 400);

// Scenarios plus episodes sampled from fictitious play under the ground
// truth weights. Episode e goes to fold e % folds.
std::vector<EvalCase> synthetic_suite(const SuiteOptions& options = {});

// Only the episodes whose fold passes `keep`; cases left empty are dropped.
std::vector<EvalCase> filter_folds(std::span<const EvalCase> cases,
                                   const std::function<bool(int)>& keep);

// One demonstration per track: static planes of its agent (goal = last
// cell), social planes from the co-observed tracks of the episode, and the
// constant-velocity collision region of the scenario's agents when enabled.
DemonstrationSet build_demonstrations(std::span<const EvalCase> cases,
                                      const FeatureToggles& toggles,
                                      const FPConfig& config = {});

}  // namespace fpf

#endif  // FPFORECAST_SUITE_H_
