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

#ifndef FPFORECAST_KERNELS_H_
#define FPFORECAST_KERNELS_H_

#include <span>

#include "fpforecast/features.h"
#include "fpforecast/lattice.h"
#include "fpforecast/plane.h"

// Data-parallel inner loops. Each kernel has a serial twin in
// fpf::reference used by the tests and the benchmark; results agree to
// rounding (the parallel forms sum in a fixed order, so they are also
// bit-stable across thread counts).
namespace fpf::kernels {

// One Jacobi soft-Bellman sweep over all free cells:
//   Q(x,a) = r(x) + v_in(succ(x,a)),  v_out(x) = logsumexp_a Q(x,a),
// with the goal absorbing (Q(goal, stay) = 0, other goal actions -inf).
// Arrays are indexed by cell (q by cell * 9 + action). Returns the sup-norm
// change between v_in and v_out over free cells (inf when a value leaves
// -inf).
double soft_bellman_sweep(const GridMap& map, std::span<const double> reward,
                          int goal_index, std::span<const double> v_in,
                          std::span<double> q_out, std::span<double> v_out);

// d_out(x') = sum_{x,a : succ(x,a) = x'} policy(x,a) d_in(x). Pull form over
// the map's predecessor lists.
void push_forward(const GridMap& map, std::span<const double> policy,
                  std::span<const double> d_in, std::span<double> d_out);

// out = in * disc (zero padding outside the grid).
void convolve_disc(const Plane& in, const DiscKernel& kernel, Plane& out);

}  // namespace fpf::kernels

namespace fpf::reference {

double soft_bellman_sweep(const GridMap& map, std::span<const double> reward,
                          int goal_index, std::span<const double> v_in,
                          std::span<double> q_out, std::span<double> v_out);

void push_forward(const GridMap& map, std::span<const double> policy,
                  std::span<const double> d_in, std::span<double> d_out);

void convolve_disc(const Plane& in, const DiscKernel& kernel, Plane& out);

}  // namespace fpf::reference

#endif  // FPFORECAST_KERNELS_H_
