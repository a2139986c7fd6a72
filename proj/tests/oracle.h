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

// Brute-force reference computations for tests. Nothing here touches the
// library's successor tables or value iteration.
#ifndef FPFORECAST_TESTS_ORACLE_H_
#define FPFORECAST_TESTS_ORACLE_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "fpforecast/lattice.h"
#include "fpforecast/plane.h"

namespace fpf::oracle {

struct Path {
  std::vector<Cell> states;
  std::vector<int> actions;
  double log_weight = 0.0;  // sum of rewards over non-goal states
};

inline Cell step(const std::vector<std::uint8_t>& mask, int w, int h, Cell x,
                 int a) {
  static const int dx[9] = {0, -1, 0, 1, -1, 1, -1, 0, 1};
  static const int dy[9] = {0, -1, -1, -1, 0, 0, 1, 1, 1};
  const Cell n{x.x + dx[a], x.y + dy[a]};
  if (n.x < 0 || n.y < 0 || n.x >= w || n.y >= h) return x;
  if (mask[n.y * w + n.x]) return x;
  return n;
}

// Every action sequence from `start` that first reaches `goal` within
// `horizon` steps.
inline std::vector<Path> enumerate_paths(const std::vector<std::uint8_t>& mask,
                                         int w, int h, const Plane& reward,
                                         Cell start, Cell goal, int horizon) {
  std::vector<Path> out;
  Path cur;
  cur.states.push_back(start);
  std::function<void()> rec = [&]() {
    const Cell x = cur.states.back();
    if (x == goal) {
      out.push_back(cur);
      return;
    }
    if (static_cast<int>(cur.actions.size()) == horizon) return;
    const double lw = cur.log_weight;
    cur.log_weight += reward(x.x, x.y);
    for (int a = 0; a < 9; ++a) {
      cur.states.push_back(step(mask, w, h, x, a));
      cur.actions.push_back(a);
      rec();
      cur.states.pop_back();
      cur.actions.pop_back();
    }
    cur.log_weight = lw;
  };
  rec();
  return out;
}

inline double log_sum_exp(const std::vector<double>& xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

inline double log_z(const std::vector<Path>& paths) {
  std::vector<double> lw;
  lw.reserve(paths.size());
  for (const auto& p : paths) lw.push_back(p.log_weight);
  return log_sum_exp(lw);
}

// Infinite-horizon partition function by a dense linear solve of
// z(x) = e^{r(x)} sum_a z(step(x,a)), z(goal) = 1.
inline std::vector<double> solve_log_z(const std::vector<std::uint8_t>& mask,
                                       int w, int h, const Plane& reward,
                                       Cell goal) {
  const int n = w * h;
  std::vector<double> A(static_cast<std::size_t>(n) * n, 0.0), b(n, 0.0);
  for (int i = 0; i < n; ++i) {
    A[i * n + i] = 1.0;
    const Cell x{i % w, i / w};
    if (mask[i]) continue;
    if (x == goal) {
      b[i] = 1.0;
      continue;
    }
    const double e = std::exp(reward(x.x, x.y));
    for (int a = 0; a < 9; ++a) {
      const Cell y = step(mask, w, h, x, a);
      A[i * n + (y.y * w + y.x)] -= e;
    }
  }
  // Gaussian elimination with partial pivoting.
  for (int c = 0; c < n; ++c) {
    int p = c;
    for (int r = c + 1; r < n; ++r) {
      if (std::abs(A[r * n + c]) > std::abs(A[p * n + c])) p = r;
    }
    if (p != c) {
      for (int k = 0; k < n; ++k) std::swap(A[c * n + k], A[p * n + k]);
      std::swap(b[c], b[p]);
    }
    for (int r = c + 1; r < n; ++r) {
      const double f = A[r * n + c] / A[c * n + c];
      if (f == 0.0) continue;
      for (int k = c; k < n; ++k) A[r * n + k] -= f * A[c * n + k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> z(n);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int k = r + 1; k < n; ++k) s -= A[r * n + k] * z[k];
    z[r] = s / A[r * n + r];
  }
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    out[i] = z[i] > 0.0 ? std::log(z[i])
                        : -std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace fpf::oracle

#endif  // FPFORECAST_TESTS_ORACLE_H_
