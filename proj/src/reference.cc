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

// Straightforward serial versions of the kernels in kernels.cc. Kept for
// testing and benchmarking; not used on the production path.

#include <algorithm>
#include <cmath>
#include <limits>

#include "fpforecast/kernels.h"

namespace fpf::reference {

double soft_bellman_sweep(const GridMap& map, std::span<const double> reward,
                          int goal_index, std::span<const double> v_in,
                          std::span<double> q_out, std::span<double> v_out) {
  const double ninf = -std::numeric_limits<double>::infinity();
  double diff = 0.0;
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const Cell c{x, y};
      if (map.is_obstacle(c)) continue;
      const int i = map.index(c);
      double v = 0.0;
      if (i == goal_index) {
        for (int a = 0; a < kNumActions; ++a) {
          q_out[i * kNumActions + a] = (a == kStay) ? 0.0 : ninf;
        }
      } else {
        double m = ninf;
        for (int a = 0; a < kNumActions; ++a) {
          const double vn = v_in[map.index(transition(map, c, a))];
          q_out[i * kNumActions + a] = reward[i] + vn;
          m = std::max(m, q_out[i * kNumActions + a]);
        }
        if (m == ninf) {
          v = ninf;
        } else {
          double s = 0.0;
          for (int a = 0; a < kNumActions; ++a) {
            s += std::exp(q_out[i * kNumActions + a] - m);
          }
          v = m + std::log(s);
        }
      }
      v_out[i] = v;
      if (v_in[i] == ninf) {
        if (v != ninf) diff = std::numeric_limits<double>::infinity();
      } else {
        diff = std::max(diff, std::abs(v - v_in[i]));
      }
    }
  }
  return diff;
}

void push_forward(const GridMap& map, std::span<const double> policy,
                  std::span<const double> d_in, std::span<double> d_out) {
  std::fill(d_out.begin(), d_out.end(), 0.0);
  for (int i : map.free_cells()) {
    if (d_in[i] == 0.0) continue;
    const Cell c = map.cell(i);
    for (int a = 0; a < kNumActions; ++a) {
      const Cell next = transition(map, c, a);
      d_out[map.index(next)] += policy[i * kNumActions + a] * d_in[i];
    }
  }
}

void convolve_disc(const Plane& in, const DiscKernel& kernel, Plane& out) {
  out = Plane(in.width(), in.height());
  for (int y = 0; y < in.height(); ++y) {
    for (int x = 0; x < in.width(); ++x) {
      const double v = in(x, y);
      if (v == 0.0) continue;
      for (const auto& [dx, dy] : kernel.offsets) {
        const int tx = x + dx;
        const int ty = y + dy;
        if (tx < 0 || ty < 0 || tx >= in.width() || ty >= in.height()) continue;
        out(tx, ty) += kernel.weight * v;
      }
    }
  }
}

}  // namespace fpf::reference
