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

#ifndef FPFORECAST_SCENARIO_H_
#define FPFORECAST_SCENARIO_H_

#include <optional>
#include <string>
#include <vector>

#include "fpforecast/forecaster.h"
#include "fpforecast/lattice.h"

namespace fpf {

struct Scenario {
  std::string name;
  GridMap map{1, 1};
  std::vector<AgentProfile> agents;
  std::optional<SpeedStats> speed_stats;
  std::string notes;

  // Map invariants plus every agent, and unique agent ids.
  void validate() const;
  const AgentProfile& agent(int id) const;
};

// Tracks observed together, at most one per agent.
struct Episode {
  int id = 0;
  int fold = 0;
  std::vector<Trajectory> tracks;
};

struct EvalCase {
  Scenario scenario;
  std::vector<Episode> episodes;

  std::size_t track_count() const;
  int longest_track() const;
};

}  // namespace fpf

#endif  // FPFORECAST_SCENARIO_H_
