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

#ifndef FPFORECAST_ERRORS_H_
#define FPFORECAST_ERRORS_H_

#include <stdexcept>
#include <string>

namespace fpf {

// Bad input: malformed files, out-of-range cells, inconsistent plane orders.
// The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: soft value iteration did not converge, non-negative
// rewards, unabsorbed visitation mass. The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fpf

#endif  // FPFORECAST_ERRORS_H_
