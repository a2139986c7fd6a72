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

#include "fpforecast/kernels.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fpf::kernels {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double soft_bellman_sweep(const GridMap& map, std::span<const double> reward,
                          int goal_index, std::span<const double> v_in,
                          std::span<double> q_out, std::span<double> v_out) {
  const std::span<const int> free = map.free_cells();
  const std::span<const int> succ = map.successor_table();
  const int n = static_cast<int>(free.size());
  double diff = 0.0;

#pragma omp parallel for reduction(max : diff) schedule(static)
  for (int k = 0; k < n; ++k) {
    const int i = free[k];
    double* q = q_out.data() + static_cast<std::size_t>(i) * kNumActions;
    const int* s = succ.data() + static_cast<std::size_t>(i) * kNumActions;
    double v;
    if (i == goal_index) {
      q[kStay] = 0.0;
      for (int a = 1; a < kNumActions; ++a) q[a] = kNegInf;
      v = 0.0;
    } else {
      const double r = reward[i];
      double m = kNegInf;
      for (int a = 0; a < kNumActions; ++a) {
        const double vn = v_in[s[a]];
        q[a] = r + vn;
        m = std::max(m, vn);
      }
      if (m == kNegInf) {
        v = kNegInf;
      } else {
        double acc = 0.0;
        for (int a = 0; a < kNumActions; ++a) acc += std::exp(v_in[s[a]] - m);
        v = r + m + std::log(acc);
      }
    }
    v_out[i] = v;
    const double prev = v_in[i];
    double d;
    if (prev == kNegInf) {
      d = (v == kNegInf) ? 0.0 : kInf;
    } else {
      d = std::abs(v - prev);
    }
    diff = std::max(diff, d);
  }
  return diff;
}

void push_forward(const GridMap& map, std::span<const double> policy,
                  std::span<const double> d_in, std::span<double> d_out) {
  std::fill(d_out.begin(), d_out.end(), 0.0);
  const std::span<const int> free = map.free_cells();
  const int n = static_cast<int>(free.size());

#pragma omp parallel for schedule(static)
  for (int k = 0; k < n; ++k) {
    const int i = free[k];
    double acc = 0.0;
    for (int e : map.predecessors(i)) {
      acc += policy[e] * d_in[e / kNumActions];
    }
    d_out[i] = acc;
  }
}

void convolve_disc(const Plane& in, const DiscKernel& kernel, Plane& out) {
  const int w = in.width();
  const int h = in.height();
  out = Plane(w, h);

#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (const auto& [dx, dy] : kernel.offsets) {
        const int sx = x + dx;
        const int sy = y + dy;
        if (sx < 0 || sy < 0 || sx >= w || sy >= h) continue;
        acc += in(sx, sy);
      }
      out(x, y) = acc * kernel.weight;
    }
  }
}

}  // namespace fpf::kernels
