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

#include "fpforecast/features.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fpforecast/errors.h"
#include "fpforecast/kernels.h"

namespace fpf {

namespace {

constexpr std::array<std::string_view, kNumFeatureKinds> kNames = {
    "bias", "f_occ", "f_dog", "f_bod", "f_soc_r1", "f_soc_r2", "f_soc_r3",
    "f_cv"};

constexpr std::array<FeatureKind, 3> kSocialKinds = {
    FeatureKind::kSocialIntimate, FeatureKind::kSocialPersonal,
    FeatureKind::kSocialPublic};

PlanePtr make_plane(FeatureKind kind, Plane values, bool time_varying = false) {
  auto p = std::make_shared<FeaturePlane>();
  p->kind = kind;
  p->values = std::move(values);
  p->time_varying = time_varying;
  return p;
}

Plane window_fraction(const GridMap& map, const std::vector<bool>& marked) {
  Plane out(map.width(), map.height());
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      int count = 0;
      for (int dy = -2; dy <= 2; ++dy) {
        for (int dx = -2; dx <= 2; ++dx) {
          const Cell c{x + dx, y + dy};
          if (map.in_bounds(c) && marked[map.index(c)]) ++count;
        }
      }
      out(x, y) = count / 25.0;
    }
  }
  return out;
}

}  // namespace

std::string_view feature_name(FeatureKind kind) {
  return kNames[static_cast<int>(kind)];
}

FeatureKind feature_from_name(std::string_view name) {
  for (int i = 0; i < kNumFeatureKinds; ++i) {
    if (kNames[i] == name) return static_cast<FeatureKind>(i);
  }
  throw ValidationError("unknown feature plane '" + std::string(name) + "'");
}

bool is_social(FeatureKind kind) {
  return kind == FeatureKind::kSocialIntimate ||
         kind == FeatureKind::kSocialPersonal ||
         kind == FeatureKind::kSocialPublic;
}

FeatureToggles FeatureToggles::parse(std::string_view list) {
  FeatureToggles t{false, false, false, false, false};
  std::string item;
  std::stringstream ss{std::string(list)};
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item.rfind("f_", 0) == 0) item = item.substr(2);
    if (item == "occ") {
      t.occupancy = true;
    } else if (item == "dog") {
      t.distance_to_goal = true;
    } else if (item == "bod") {
      t.body_orientation = true;
    } else if (item == "soc") {
      t.social = true;
    } else if (item == "cv") {
      t.collision_region = true;
    } else {
      throw ValidationError("unknown feature toggle '" + item +
                            "' (expected occ, dog, bod, soc, cv)");
    }
  }
  return t;
}

std::string FeatureToggles::to_string() const {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(occupancy, "occ");
  add(distance_to_goal, "dog");
  add(body_orientation, "bod");
  add(social, "soc");
  add(collision_region, "cv");
  return out;
}

FeatureStack::FeatureStack(std::vector<PlanePtr> planes)
    : planes_(std::move(planes)) {
  if (planes_.empty()) throw ValidationError("feature stack has no planes");
  for (std::size_t j = 0; j < planes_.size(); ++j) {
    if (!planes_[j]) throw ValidationError("null feature plane");
    if (planes_[j]->values.width() != planes_[0]->values.width() ||
        planes_[j]->values.height() != planes_[0]->values.height()) {
      throw ValidationError("feature planes differ in size");
    }
    if (j > 0 && static_cast<int>(planes_[j]->kind) <=
                     static_cast<int>(planes_[j - 1]->kind)) {
      throw ValidationError("feature planes out of canonical order");
    }
  }
}

std::size_t FeatureStack::feature_plane_count() const {
  return static_cast<std::size_t>(std::count_if(
      planes_.begin(), planes_.end(),
      [](const PlanePtr& p) { return p->kind != FeatureKind::kBias; }));
}

std::vector<FeatureKind> FeatureStack::plane_order() const {
  std::vector<FeatureKind> order;
  order.reserve(planes_.size());
  for (const auto& p : planes_) order.push_back(p->kind);
  return order;
}

int FeatureStack::width() const { return planes_.at(0)->values.width(); }
int FeatureStack::height() const { return planes_.at(0)->values.height(); }

std::vector<double> FeatureStack::features_at(Cell c) const {
  std::vector<double> f;
  f.reserve(planes_.size());
  for (const auto& p : planes_) f.push_back(p->values(c.x, c.y));
  return f;
}

Plane FeatureStack::reward(std::span<const double> theta) const {
  if (theta.size() != planes_.size()) {
    throw ValidationError("weight vector has " + std::to_string(theta.size()) +
                          " entries for " + std::to_string(planes_.size()) +
                          " planes");
  }
  Plane r(width(), height());
  for (std::size_t j = 0; j < planes_.size(); ++j) {
    const auto src = planes_[j]->values.values();
    auto dst = r.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += theta[j] * src[i];
  }
  return r;
}

FeatureStack FeatureStack::with_social(
    const std::array<PlanePtr, 3>& social) const {
  std::vector<PlanePtr> planes = planes_;
  for (auto& p : planes) {
    for (int r = 0; r < 3; ++r) {
      if (p->kind == kSocialKinds[r]) p = social[r];
    }
  }
  return FeatureStack(std::move(planes));
}

std::array<int, 3> ProxemicKernels::cell_radii(double cell_size) const {
  std::array<int, 3> out{};
  for (int r = 0; r < 3; ++r) {
    out[r] = std::max(1, static_cast<int>(std::lround(radii_m[r] / cell_size)));
  }
  return out;
}

DiscKernel DiscKernel::make(int radius) {
  DiscKernel k;
  k.radius = radius;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy <= radius * radius) k.offsets.emplace_back(dx, dy);
    }
  }
  k.weight = 1.0 / static_cast<double>(k.offsets.size());
  return k;
}

PlanePtr build_bias_plane(const GridMap& map) {
  return make_plane(FeatureKind::kBias, Plane(map.width(), map.height(), 1.0));
}

PlanePtr build_occupancy_feature(const GridMap& map) {
  std::vector<bool> obstacles(map.num_cells());
  for (int i = 0; i < map.num_cells(); ++i) {
    obstacles[i] = map.obstacle_mask()[i] != 0;
  }
  return make_plane(FeatureKind::kOccupancy, window_fraction(map, obstacles));
}

PlanePtr build_distance_to_goal_feature(const GridMap& map, Cell goal) {
  map.require_free(goal, "goal");
  Plane d(map.width(), map.height());
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      d(x, y) = std::hypot(double(x - goal.x), double(y - goal.y));
    }
  }
  const double m = d.max();
  if (m > 0.0) d *= 1.0 / m;
  return make_plane(FeatureKind::kDistanceToGoal, std::move(d));
}

double body_orientation_raw(Cell start, Cell neighbor, double orientation) {
  const double dx = neighbor.x - start.x;
  const double dy = neighbor.y - start.y;
  const double norm = std::hypot(dx, dy);
  if (norm == 0.0) return 0.0;
  const double cosine =
      (dx * std::cos(orientation) + dy * std::sin(orientation)) / norm;
  return std::clamp(cosine, -1.0, 1.0) - 1.0;
}

PlanePtr build_body_orientation_feature(const GridMap& map, Cell start,
                                        double orientation) {
  map.require_free(start, "start");
  if (!std::isfinite(orientation)) {
    throw ValidationError("orientation must be finite");
  }
  Plane p(map.width(), map.height(), 0.0);
  for (int a = 1; a < kNumActions; ++a) {
    const Cell n{start.x + kActions[a].dx, start.y + kActions[a].dy};
    if (!map.in_bounds(n)) continue;
    p(n.x, n.y) = -body_orientation_raw(start, n, orientation) / 2.0;
  }
  return make_plane(FeatureKind::kBodyOrientation, std::move(p));
}

PlanePtr build_region_feature(const GridMap& map,
                              const std::vector<bool>& region) {
  if (region.size() != static_cast<std::size_t>(map.num_cells())) {
    throw ValidationError("region mask size does not match the grid");
  }
  return make_plane(FeatureKind::kCollisionRegion, window_fraction(map, region));
}

std::array<Plane, 3> build_social_planes(const Plane& occupancy,
                                         const ProxemicKernels& kernels,
                                         double cell_size) {
  for (double v : occupancy.values()) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError("occupancy plane must be finite and non-negative");
    }
  }
  const auto radii = kernels.cell_radii(cell_size);
  std::array<Plane, 3> out;
  for (int r = 0; r < 3; ++r) {
    kernels::convolve_disc(occupancy, DiscKernel::make(radii[r]), out[r]);
  }
  return out;
}

SocialNormalizer SocialNormalizer::from_max(
    std::span<const std::array<Plane, 3>> raw) {
  SocialNormalizer n;
  for (int r = 0; r < 3; ++r) {
    double m = 0.0;
    for (const auto& planes : raw) m = std::max(m, planes[r].max());
    n.divisors_[r] = m > 0.0 ? m : 1.0;
  }
  return n;
}

std::array<PlanePtr, 3> SocialNormalizer::apply(
    const std::array<Plane, 3>& raw) const {
  std::array<PlanePtr, 3> out;
  for (int r = 0; r < 3; ++r) {
    Plane p = raw[r];
    for (double& v : p.values()) v = std::clamp(v / divisors_[r], 0.0, 1.0);
    out[r] = make_plane(kSocialKinds[r], std::move(p), true);
  }
  return out;
}

std::array<PlanePtr, 3> zero_social_planes(const GridMap& map) {
  std::array<PlanePtr, 3> out;
  for (int r = 0; r < 3; ++r) {
    out[r] = make_plane(kSocialKinds[r], Plane(map.width(), map.height()), true);
  }
  return out;
}

std::vector<FeatureKind> plane_order_for(const FeatureToggles& enabled) {
  std::vector<FeatureKind> order{FeatureKind::kBias};
  if (enabled.occupancy) order.push_back(FeatureKind::kOccupancy);
  if (enabled.distance_to_goal) order.push_back(FeatureKind::kDistanceToGoal);
  if (enabled.body_orientation) order.push_back(FeatureKind::kBodyOrientation);
  if (enabled.social) {
    order.insert(order.end(), kSocialKinds.begin(), kSocialKinds.end());
  }
  if (enabled.collision_region) order.push_back(FeatureKind::kCollisionRegion);
  return order;
}

FeatureStack assemble_stack(const PlaneSet& planes,
                            const FeatureToggles& enabled) {
  if (!enabled.any()) {
    throw ValidationError("feature toggle set is empty");
  }
  auto need = [](const PlanePtr& p, const char* what) {
    if (!p) throw ValidationError(std::string("missing plane ") + what);
    return p;
  };
  std::vector<PlanePtr> out{need(planes.bias, "bias")};
  if (enabled.occupancy) out.push_back(need(planes.occupancy, "f_occ"));
  if (enabled.distance_to_goal) {
    out.push_back(need(planes.distance_to_goal, "f_dog"));
  }
  if (enabled.body_orientation) {
    out.push_back(need(planes.body_orientation, "f_bod"));
  }
  if (enabled.social) {
    for (const auto& p : planes.social) out.push_back(need(p, "f_soc"));
  }
  if (enabled.collision_region) {
    out.push_back(need(planes.collision_region, "f_cv"));
  }
  return FeatureStack(std::move(out));
}

PlaneCache::PlaneCache(const GridMap& map)
    : map_(map),
      bias_(build_bias_plane(map)),
      occupancy_(build_occupancy_feature(map)),
      zero_body_(make_plane(FeatureKind::kBodyOrientation,
                            Plane(map.width(), map.height()))),
      zero_social_(zero_social_planes(map)) {}

PlanePtr PlaneCache::distance_to_goal(Cell goal) {
  for (const auto& [g, p] : distance_) {
    if (g == goal) return p;
  }
  distance_.emplace_back(goal, build_distance_to_goal_feature(map_, goal));
  return distance_.back().second;
}

PlaneSet PlaneCache::agent_planes(Cell start, Cell goal,
                                  std::optional<double> orientation) {
  map_.require_free(start, "start");
  PlaneSet s;
  s.bias = bias_;
  s.occupancy = occupancy_;
  s.distance_to_goal = distance_to_goal(goal);
  s.body_orientation =
      orientation ? build_body_orientation_feature(map_, start, *orientation)
                  : zero_body_;
  s.social = zero_social_;
  return s;
}

}  // namespace fpf
