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

#include "fpforecast/plane.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace fpf {

double Plane::sum() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

double Plane::max() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values_) m = std::max(m, v);
  return m;
}

double Plane::min() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : values_) m = std::min(m, v);
  return m;
}

bool Plane::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

std::size_t Plane::nonzero_count() const {
  return static_cast<std::size_t>(std::count_if(
      values_.begin(), values_.end(), [](double v) { return v != 0.0; }));
}

Plane& Plane::operator+=(const Plane& other) {
  assert(other.width_ == width_ && other.height_ == height_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Plane& Plane::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

}  // namespace fpf
