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

#ifndef FPFORECAST_FEATURES_H_
#define FPFORECAST_FEATURES_H_

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fpforecast/lattice.h"
#include "fpforecast/plane.h"

namespace fpf {

// Canonical plane order; weight vectors are indexed in this order restricted
// to the planes present in a stack.
enum class FeatureKind {
  kBias = 0,
  kOccupancy,
  kDistanceToGoal,
  kBodyOrientation,
  kSocialIntimate,
  kSocialPersonal,
  kSocialPublic,
  kCollisionRegion,
};

inline constexpr int kNumFeatureKinds = 8;

std::string_view feature_name(FeatureKind kind);
// Throws ValidationError on an unknown name.
FeatureKind feature_from_name(std::string_view name);
bool is_social(FeatureKind kind);

struct FeaturePlane {
  FeatureKind kind = FeatureKind::kBias;
  Plane values;
  bool time_varying = false;

  std::string_view name() const { return feature_name(kind); }
};

using PlanePtr = std::shared_ptr<const FeaturePlane>;

// Which optional planes a model uses. The bias plane is always present.
struct FeatureToggles {
  bool occupancy = true;
  bool distance_to_goal = true;
  bool body_orientation = true;
  bool social = true;
  bool collision_region = false;

  // Parses a comma list of {occ, dog, bod, soc, cv}.
  static FeatureToggles parse(std::string_view list);
  std::string to_string() const;
  bool any() const {
    return occupancy || distance_to_goal || body_orientation || social ||
           collision_region;
  }
  bool operator==(const FeatureToggles&) const = default;
};

// Ordered planes paired with a weight vector of the same length.
class FeatureStack {
 public:
  FeatureStack() = default;
  explicit FeatureStack(std::vector<PlanePtr> planes);

  std::size_t size() const { return planes_.size(); }
  // Planes other than the constant bias.
  std::size_t feature_plane_count() const;
  const FeaturePlane& plane(std::size_t j) const { return *planes_[j]; }
  const std::vector<PlanePtr>& planes() const { return planes_; }
  std::vector<FeatureKind> plane_order() const;
  int width() const;
  int height() const;

  // Per-cell feature vector.
  std::vector<double> features_at(Cell c) const;
  // R(x) = sum_j theta_j f_j(x), accumulated in plane order.
  Plane reward(std::span<const double> theta) const;

  // Copy with the social planes replaced (kinds must already be present).
  FeatureStack with_social(const std::array<PlanePtr, 3>& social) const;

 private:
  std::vector<PlanePtr> planes_;
};

// Hall's intimate / personal / social distances.
struct ProxemicKernels {
  std::array<double, 3> radii_m{0.45, 1.2, 3.6};

  // Radii in cells, rounded to nearest and floored at 1.
  std::array<int, 3> cell_radii(double cell_size) const;
};

// Unit-sum disc of the given cell radius: offsets with dx^2 + dy^2 <= r^2.
struct DiscKernel {
  int radius = 1;
  std::vector<std::pair<int, int>> offsets;
  double weight = 1.0;

  static DiscKernel make(int radius);
};

PlanePtr build_bias_plane(const GridMap& map);

// Obstacle fraction in the 5x5 window centred on each cell (clipped at the
// border, divided by 25).
PlanePtr build_occupancy_feature(const GridMap& map);

// Euclidean distance to goal divided by the maximum over free cells.
PlanePtr build_distance_to_goal_feature(const GridMap& map, Cell goal);

// cos(angle between (neighbor - start) and the facing direction) - 1, in
// [-2, 0]. Orientation is measured from +x toward +y.
double body_orientation_raw(Cell start, Cell neighbor, double orientation);

// Cost-oriented body orientation plane: -raw/2 on the 8 neighbours of start
// (0 toward the facing direction, 1 opposite) and 0 elsewhere.
PlanePtr build_body_orientation_feature(const GridMap& map, Cell start,
                                        double orientation);

// Obstacle-style encoding of an arbitrary region mask (collision regions of
// constant-velocity rays).
PlanePtr build_region_feature(const GridMap& map,
                              const std::vector<bool>& region);

// Disc-smoothed copies of a non-negative occupancy plane, one per proxemic
// radius, before normalization. Linear in `occupancy`.
std::array<Plane, 3> build_social_planes(const Plane& occupancy,
                                         const ProxemicKernels& kernels,
                                         double cell_size);

// Fixed per-radius divisors; planes are divided then clipped to [0, 1].
class SocialNormalizer {
 public:
  SocialNormalizer() { divisors_.fill(1.0); }
  // Divisor per radius = max over the given raw planes (1 when all zero).
  static SocialNormalizer from_max(std::span<const std::array<Plane, 3>> raw);

  std::array<PlanePtr, 3> apply(const std::array<Plane, 3>& raw) const;
  const std::array<double, 3>& divisors() const { return divisors_; }

 private:
  std::array<double, 3> divisors_;
};

std::array<PlanePtr, 3> zero_social_planes(const GridMap& map);

// Planes available for assembling a stack. Unused members may be null.
struct PlaneSet {
  PlanePtr bias;
  PlanePtr occupancy;
  PlanePtr distance_to_goal;
  PlanePtr body_orientation;
  std::array<PlanePtr, 3> social;
  PlanePtr collision_region;
};

// Canonical order [bias, f_occ, f_dog, f_bod, f_soc_r1..3, f_cv] restricted
// to enabled planes. Throws ValidationError if nothing is enabled or an
// enabled plane is missing.
FeatureStack assemble_stack(const PlaneSet& planes,
                            const FeatureToggles& enabled);

std::vector<FeatureKind> plane_order_for(const FeatureToggles& enabled);

// Shares the agent-independent planes of one map so stacks built from it
// compare equal by pointer. Not thread-safe.
class PlaneCache {
 public:
  explicit PlaneCache(const GridMap& map);

  const GridMap& map() const { return map_; }
  PlanePtr distance_to_goal(Cell goal);
  // Static planes for one agent with zero social planes. f_bod is all zero
  // when the orientation is unknown.
  PlaneSet agent_planes(Cell start, Cell goal,
                        std::optional<double> orientation);

 private:
  GridMap map_;
  PlanePtr bias_;
  PlanePtr occupancy_;
  PlanePtr zero_body_;
  std::array<PlanePtr, 3> zero_social_;
  std::vector<std::pair<Cell, PlanePtr>> distance_;
};

}  // namespace fpf

#endif  // FPFORECAST_FEATURES_H_
