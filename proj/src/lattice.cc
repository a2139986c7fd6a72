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

#include "fpforecast/lattice.h"

#include <algorithm>
#include <cstdlib>
#include <deque>

#include "fpforecast/errors.h"

namespace fpf {

std::string to_string(const Cell& c) {
  return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")";
}

int action_index(Action a) {
  for (int i = 0; i < kNumActions; ++i) {
    if (kActions[i] == a) return i;
  }
  throw ValidationError("not a lattice action: (" + std::to_string(a.dx) +
                        "," + std::to_string(a.dy) + ")");
}

GridMap::GridMap(int width, int height, double cell_size,
                 std::vector<std::uint8_t> obstacle_mask)
    : width_(width),
      height_(height),
      cell_size_(cell_size),
      mask_(std::move(obstacle_mask)) {
  if (width < 1 || height < 1) {
    throw ValidationError("grid dimensions must be >= 1, got " +
                          std::to_string(width) + "x" + std::to_string(height));
  }
  if (!(cell_size > 0.0)) {
    throw ValidationError("cell_size must be positive");
  }
  if (mask_.size() != static_cast<std::size_t>(width) * height) {
    throw ValidationError("obstacle mask has " + std::to_string(mask_.size()) +
                          " entries, expected " +
                          std::to_string(width * height));
  }
  build_tables();
  if (free_cells_.empty()) {
    throw ValidationError("grid has no free cell");
  }
}

GridMap::GridMap(int width, int height, double cell_size)
    : GridMap(width, height, cell_size,
              std::vector<std::uint8_t>(
                  static_cast<std::size_t>(std::max(width, 0)) *
                      static_cast<std::size_t>(std::max(height, 0)),
                  0)) {}

void GridMap::build_tables() {
  const int n = width_ * height_;
  free_cells_.clear();
  successor_.assign(static_cast<std::size_t>(n) * kNumActions, 0);
  for (int i = 0; i < n; ++i) {
    const Cell c = cell(i);
    const bool free = mask_[i] == 0;
    if (free) free_cells_.push_back(i);
    for (int a = 0; a < kNumActions; ++a) {
      const Cell next{c.x + kActions[a].dx, c.y + kActions[a].dy};
      const bool ok = free && in_bounds(next) && mask_[index(next)] == 0;
      successor_[static_cast<std::size_t>(i) * kNumActions + a] =
          ok ? index(next) : i;
    }
  }
  std::vector<int> counts(n + 1, 0);
  for (int src : free_cells_) {
    for (int a = 0; a < kNumActions; ++a) ++counts[successor(src, a) + 1];
  }
  pred_offsets_.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) pred_offsets_[i + 1] = pred_offsets_[i] + counts[i + 1];
  pred_entries_.assign(pred_offsets_[n], 0);
  std::vector<int> fill(pred_offsets_.begin(), pred_offsets_.end() - 1);
  for (int src : free_cells_) {
    for (int a = 0; a < kNumActions; ++a) {
      pred_entries_[fill[successor(src, a)]++] = src * kNumActions + a;
    }
  }
}

void GridMap::require_free(Cell c, const std::string& what) const {
  if (!in_bounds(c)) {
    throw ValidationError(what + " " + to_string(c) + " is outside the " +
                          std::to_string(width_) + "x" +
                          std::to_string(height_) + " grid");
  }
  if (is_obstacle(c)) {
    throw ValidationError(what + " " + to_string(c) + " is on an obstacle");
  }
}

Cell transition(const GridMap& map, Cell x, int action) {
  map.require_free(x, "state");
  if (action < 0 || action >= kNumActions) {
    throw ValidationError("action index out of range: " +
                          std::to_string(action));
  }
  return map.cell(map.successor(map.index(x), action));
}

Cell transition(const GridMap& map, Cell x, Action a) {
  return transition(map, x, action_index(a));
}

std::vector<std::pair<Action, Cell>> neighbors8(const GridMap& map, Cell x) {
  map.require_free(x, "state");
  std::vector<std::pair<Action, Cell>> out;
  out.reserve(kNumActions - 1);
  for (int a = 1; a < kNumActions; ++a) {
    out.emplace_back(kActions[a], map.cell(map.successor(map.index(x), a)));
  }
  return out;
}

std::vector<bool> reachable_from(const GridMap& map, Cell from) {
  std::vector<bool> seen(map.num_cells(), false);
  if (!map.is_free(from)) return seen;
  std::deque<int> queue{map.index(from)};
  seen[map.index(from)] = true;
  while (!queue.empty()) {
    const int i = queue.front();
    queue.pop_front();
    for (int a = 1; a < kNumActions; ++a) {
      const int j = map.successor(i, a);
      if (!seen[j]) {
        seen[j] = true;
        queue.push_back(j);
      }
    }
  }
  return seen;
}

void Trajectory::validate(const GridMap& map) const {
  if (states.size() != actions.size() + 1) {
    throw ValidationError("trajectory of agent " + std::to_string(agent_id) +
                          " has " + std::to_string(states.size()) +
                          " states for " + std::to_string(actions.size()) +
                          " actions");
  }
  for (const Cell& s : states) map.require_free(s, "trajectory state");
  for (std::size_t k = 0; k < actions.size(); ++k) {
    if (transition(map, states[k], actions[k]) != states[k + 1]) {
      throw ValidationError("trajectory of agent " + std::to_string(agent_id) +
                            " breaks the transition model at step " +
                            std::to_string(k));
    }
  }
}

Trajectory trajectory_from_states(const GridMap& map, int agent_id,
                                  std::vector<Cell> states) {
  if (states.empty()) {
    throw ValidationError("empty trajectory for agent " +
                          std::to_string(agent_id));
  }
  Trajectory t;
  t.agent_id = agent_id;
  for (std::size_t k = 0; k + 1 < states.size(); ++k) {
    const Action a{states[k + 1].x - states[k].x, states[k + 1].y - states[k].y};
    t.actions.push_back(action_index(a));
  }
  t.states = std::move(states);
  t.validate(map);
  return t;
}

}  // namespace fpf
