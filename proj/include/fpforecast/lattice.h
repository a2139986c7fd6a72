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

#ifndef FPFORECAST_LATTICE_H_
#define FPFORECAST_LATTICE_H_

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fpf {

struct Cell {
  int x = 0;
  int y = 0;
  auto operator<=>(const Cell&) const = default;
};

std::string to_string(const Cell& c);

// Velocity on the unit lattice.
struct Action {
  int dx = 0;
  int dy = 0;
  auto operator<=>(const Action&) const = default;
};

inline constexpr int kNumActions = 9;
inline constexpr int kStay = 0;

// Stay first, then the 8 moves row-major by (dy, dx). Indices are part of
// the on-disk formats and must not change.
inline constexpr std::array<Action, kNumActions> kActions = {{
    {0, 0},
    {-1, -1}, {0, -1}, {1, -1},
    {-1, 0},           {1, 0},
    {-1, 1},  {0, 1},  {1, 1},
}};

// Index of `a` in kActions; throws ValidationError if |dx| or |dy| > 1.
int action_index(Action a);

// Immutable lattice with obstacle mask. Transition tables are built once at
// construction so planners can share a map across threads without locking.
class GridMap {
 public:
  GridMap(int width, int height, double cell_size,
          std::vector<std::uint8_t> obstacle_mask);
  // All-free map.
  GridMap(int width, int height, double cell_size = 1.0);

  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size() const { return cell_size_; }
  int num_cells() const { return width_ * height_; }

  bool in_bounds(Cell c) const {
    return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_;
  }
  bool is_obstacle(Cell c) const { return mask_[index(c)] != 0; }
  bool is_free(Cell c) const { return in_bounds(c) && !is_obstacle(c); }

  int index(Cell c) const { return c.y * width_ + c.x; }
  Cell cell(int index) const { return {index % width_, index / width_}; }

  std::span<const std::uint8_t> obstacle_mask() const { return mask_; }
  // Cell indices of non-obstacle cells, ascending.
  std::span<const int> free_cells() const { return free_cells_; }

  // Successor cell index of (cell index, action index). Only meaningful for
  // free cells.
  int successor(int cell_index, int action) const {
    return successor_[static_cast<std::size_t>(cell_index) * kNumActions +
                      action];
  }
  std::span<const int> successor_table() const { return successor_; }

  // Incoming (source cell * 9 + action) entries whose successor is the given
  // cell, ordered by source then action.
  std::span<const int> predecessors(int cell_index) const {
    return {pred_entries_.data() + pred_offsets_[cell_index],
            pred_entries_.data() + pred_offsets_[cell_index + 1]};
  }

  // Throws ValidationError naming `what` unless c is a free cell.
  void require_free(Cell c, const std::string& what) const;

  bool operator==(const GridMap& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           cell_size_ == other.cell_size_ && mask_ == other.mask_;
  }

 private:
  void build_tables();

  int width_;
  int height_;
  double cell_size_;
  std::vector<std::uint8_t> mask_;
  std::vector<int> free_cells_;
  std::vector<int> successor_;
  std::vector<int> pred_offsets_;
  std::vector<int> pred_entries_;
};

// Deterministic transition: blocked moves (out of grid or into an obstacle)
// leave the agent in place. Throws ValidationError if x is not free.
Cell transition(const GridMap& map, Cell x, Action a);
Cell transition(const GridMap& map, Cell x, int action);

// The 8 non-stay actions with their resolved successors, in action-index
// order.
std::vector<std::pair<Action, Cell>> neighbors8(const GridMap& map, Cell x);

// Cells reachable from `from` (breadth-first over the transition model).
std::vector<bool> reachable_from(const GridMap& map, Cell from);

struct Trajectory {
  int agent_id = 0;
  // states.size() == actions.size() + 1; states[k+1] is the transition of
  // (states[k], actions[k]).
  std::vector<Cell> states;
  std::vector<int> actions;

  std::size_t length() const { return actions.size(); }
  // Throws ValidationError if the trajectory leaves the free cells or is
  // inconsistent with the transition model.
  void validate(const GridMap& map) const;
};

// Builds a trajectory from a state sequence whose consecutive cells differ by
// at most one in each coordinate.
Trajectory trajectory_from_states(const GridMap& map, int agent_id,
                                  std::vector<Cell> states);

}  // namespace fpf

#endif  // FPFORECAST_LATTICE_H_
