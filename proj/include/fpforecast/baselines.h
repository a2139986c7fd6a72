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

#ifndef FPFORECAST_BASELINES_H_
#define FPFORECAST_BASELINES_H_

#include <span>
#include <string_view>
#include <vector>

#include "fpforecast/forecaster.h"

namespace fpf {

enum class ModelKind { kFP, kFPSpeed, kNMDP, kMDPCV, kMTA };

inline constexpr ModelKind kAllModels[] = {ModelKind::kFP, ModelKind::kFPSpeed,
                                           ModelKind::kNMDP, ModelKind::kMDPCV,
                                           ModelKind::kMTA};

std::string_view model_name(ModelKind kind);
// {fp, fp-speed, nmdp, mdpcv, mta}; throws ValidationError otherwise.
ModelKind model_from_name(std::string_view name);

// Planes a model plans with, derived from the user's toggle set:
// nMDP drops f_soc, MDPCV swaps it for the collision region plane, mTA keeps
// only bias and f_soc.
FeatureToggles model_toggles(ModelKind kind, const FeatureToggles& base);

// Independent planning: one soft VI per agent and goal on the static planes,
// propagated for the whole horizon. theta may carry extra planes; only
// the static ones are used.
ForecastResult forecast_nmdp(const GridMap& map,
                             std::span<const AgentProfile> agents,
                             const ThetaWeights& theta, const FPConfig& config);

// Cells of a constant-velocity walk from start toward the agent's most
// likely goal, one per time step 0..horizon. Stops at the goal.
std::vector<Cell> constant_velocity_ray(const AgentProfile& agent, double speed,
                                        int horizon);

// Cells where two rays are within Chebyshev distance 1 at the same step.
std::vector<bool> collision_region(const GridMap& map,
                                   std::span<const std::vector<Cell>> rays);

// nMDP with the collision region of all agents' rays as one more static
// plane.
ForecastResult forecast_mdpcv(const GridMap& map,
                              std::span<const AgentProfile> agents,
                              const ThetaWeights& theta, const FPConfig& config);

// Round loop of fictitious play on bias + f_soc only. Uses the others'
// current distributions unless config.lookahead is set by the caller.
ForecastResult forecast_mta(const GridMap& map,
                            std::span<const AgentProfile> agents,
                            const ThetaWeights& theta, const FPConfig& config);

// Dispatch on the model. The config's feature toggles are the base set;
// theta is restricted to the model's planes. For mTA the lookahead flag is
// taken from `mta_lookahead`.
ForecastResult forecast(ModelKind kind, const GridMap& map,
                        std::span<const AgentProfile> agents,
                        const ThetaWeights& theta, const FPConfig& config,
                        bool mta_lookahead = false);

}  // namespace fpf

#endif  // FPFORECAST_BASELINES_H_
