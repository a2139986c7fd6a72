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

#include "fpforecast/ioc.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <optional>
#include <tuple>

#include "fpforecast/errors.h"

namespace fpf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string demo_context(int index) {
  return "demo " + std::to_string(index) + ": ";
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Demos sharing planes and goal (and, for kDemoLength, length) share one
// soft VI solve.
struct Group {
  std::vector<int> members;
};

const GridMap& map_of(const Demonstration& d, const GridMap* fallback) {
  if (d.map) return *d.map;
  if (fallback == nullptr) throw ValidationError("demonstration has no map");
  return *fallback;
}

std::vector<Group> group_demos(const DemonstrationSet& demos, HorizonMode mode) {
  using Key = std::tuple<const GridMap*, std::vector<const FeaturePlane*>, Cell,
                         std::size_t>;
  std::map<Key, int> index;
  std::vector<Group> groups;
  for (int i = 0; i < static_cast<int>(demos.demos.size()); ++i) {
    const Demonstration& d = demos.demos[i];
    std::vector<const FeaturePlane*> planes;
    for (const auto& p : d.stack.planes()) planes.push_back(p.get());
    const std::size_t len =
        mode == HorizonMode::kDemoLength ? d.trajectory.length() : 0;
    Key key{d.map.get(), std::move(planes), d.goal, len};
    auto [it, inserted] = index.emplace(std::move(key), groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].members.push_back(i);
  }
  return groups;
}

// Sum over non-goal cells of w(x) f_j(x), for every plane j.
std::vector<double> weighted_counts(const FeatureStack& stack, const Plane& w,
                                    int goal_index) {
  std::vector<double> out(stack.size(), 0.0);
  for (std::size_t j = 0; j < stack.size(); ++j) {
    const auto f = stack.plane(j).values.values();
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (static_cast<int>(i) == goal_index) continue;
      s += w[i] * f[i];
    }
    out[j] = s;
  }
  return out;
}

struct GroupResult {
  std::vector<double> count_sum;  // summed over members
  std::vector<double> log_z;      // per member
};

GroupResult evaluate_group(const GridMap* fallback, const DemonstrationSet& demos,
                           const Group& group, std::span<const double> theta,
                           const TrainConfig& config,
                           std::vector<double>* warm) {
  const Demonstration& first = demos.demos[group.members.front()];
  const GridMap& map = map_of(first, fallback);
  const FeatureStack& stack = first.stack;
  const Cell goal = first.goal;
  const int goal_index = map.index(goal);
  const Plane reward = stack.reward(theta);
  const double n = static_cast<double>(group.members.size());

  GroupResult out;
  out.count_sum.assign(stack.size(), 0.0);

  if (config.horizon == HorizonMode::kFixed) {
    const int H = config.fixed_horizon;
    auto tables = finite_horizon_tables(map, reward, goal, H);
    std::vector<Policy> policies;
    policies.reserve(H);
    for (const auto& t : tables) policies.push_back(compute_policy(t));
    Plane d(map.width(), map.height());
    for (int m : group.members) {
      const Cell s = demos.demos[m].trajectory.states.front();
      double lz = 0.0;
      if (s != goal) lz = H > 0 ? tables.back().value(s) : kNegInf;
      if (lz == kNegInf) {
        throw NumericalError(demo_context(m) + "start " + to_string(s) +
                             " cannot reach the goal within " +
                             std::to_string(H) + " steps");
      }
      out.log_z.push_back(lz);
      d(s.x, s.y) += 1.0 / n;
    }
    Plane cum = d;
    for (int l = 1; l <= H; ++l) {
      d = push_forward(map, policies[H - l], d);
      cum += d;
    }
    out.count_sum = weighted_counts(stack, cum, goal_index);
    for (double& c : out.count_sum) c *= n;
    return out;
  }

  ValueTables tables = soft_value_iteration(
      map, reward, goal, config.vi,
      warm != nullptr && !warm->empty() ? warm : nullptr);
  if (!tables.converged) {
    throw NumericalError("soft value iteration did not converge after " +
                         std::to_string(tables.iterations_used) + " sweeps");
  }
  if (warm != nullptr) *warm = tables.v;
  const Policy policy = compute_policy(tables);

  for (int m : group.members) {
    const Cell s = demos.demos[m].trajectory.states.front();
    const double lz = tables.value(s);
    if (lz == kNegInf) {
      throw NumericalError(demo_context(m) + "start " + to_string(s) +
                           " cannot reach its goal");
    }
    out.log_z.push_back(lz);
  }

  if (config.horizon == HorizonMode::kDemoLength) {
    const int len = static_cast<int>(first.trajectory.length());
    Plane d(map.width(), map.height());
    for (int m : group.members) {
      const Cell s = demos.demos[m].trajectory.states.front();
      d(s.x, s.y) += 1.0 / n;
    }
    Plane cum = d;
    for (int l = 1; l <= len; ++l) {
      d = push_forward(map, policy, d);
      cum += d;
    }
    out.count_sum = weighted_counts(stack, cum, goal_index);
  } else {
    Plane d(map.width(), map.height());
    for (int m : group.members) {
      const Cell s = demos.demos[m].trajectory.states.front();
      d(s.x, s.y) += 1.0 / n;
    }
    Plane cum = d;
    int steps = 0;
    while (1.0 - d[goal_index] > config.absorb_tol) {
      if (++steps > config.max_propagation_steps) {
        throw NumericalError(
            "visitation mass did not reach the goal within " +
            std::to_string(config.max_propagation_steps) + " steps");
      }
      d = push_forward(map, policy, d);
      cum += d;
    }
    out.count_sum = weighted_counts(stack, cum, goal_index);
  }
  for (double& c : out.count_sum) c *= n;
  return out;
}

struct Evaluator {
  const GridMap* map;
  const DemonstrationSet& demos;
  const TrainConfig& config;
  std::vector<Group> groups;
  std::vector<std::vector<double>> warm;
  std::vector<std::vector<double>> demo_counts;

  Evaluator(const GridMap* m, const DemonstrationSet& d, const TrainConfig& c)
      : map(m), demos(d), config(c), groups(group_demos(d, c.horizon)) {
    warm.resize(groups.size());
    for (const auto& demo : demos.demos) {
      demo_counts.push_back(
          trajectory_feature_counts(demo.stack, demo.trajectory, demo.goal));
    }
  }

  ModelStatistics run(std::span<const double> theta) {
    const int ng = static_cast<int>(groups.size());
    std::vector<GroupResult> results(ng);
    std::vector<std::exception_ptr> errors(ng);
    const bool use_warm = config.warm_start;
#pragma omp parallel for schedule(dynamic)
    for (int g = 0; g < ng; ++g) {
      try {
        results[g] = evaluate_group(map, demos, groups[g], theta, config,
                                    use_warm ? &warm[g] : nullptr);
      } catch (...) {
        errors[g] = std::current_exception();
      }
    }
    for (int g = 0; g < ng; ++g) {
      if (!errors[g]) continue;
      try {
        std::rethrow_exception(errors[g]);
      } catch (const NumericalError& e) {
        const std::string what = e.what();
        if (what.rfind("demo ", 0) == 0) throw;
        throw NumericalError(demo_context(groups[g].members.front()) + what);
      }
    }
    // Fixed-order reduction.
    const double n = static_cast<double>(demos.demos.size());
    ModelStatistics stats;
    stats.expected.assign(theta.size(), 0.0);
    for (int g = 0; g < ng; ++g) {
      for (std::size_t j = 0; j < theta.size(); ++j) {
        stats.expected[j] += results[g].count_sum[j];
      }
      for (std::size_t k = 0; k < groups[g].members.size(); ++k) {
        const int m = groups[g].members[k];
        stats.mean_log_z += results[g].log_z[k];
        stats.log_likelihood += dot(theta, demo_counts[m]) - results[g].log_z[k];
      }
    }
    for (double& e : stats.expected) e /= n;
    stats.mean_log_z /= n;
    stats.log_likelihood /= n;
    return stats;
  }
};

}  // namespace

ThetaWeights ThetaWeights::zeros(std::vector<FeatureKind> order) {
  ThetaWeights t;
  t.raw.assign(order.size(), 0.0);
  t.plane_order = std::move(order);
  return t;
}

ThetaWeights ThetaWeights::from_effective(std::vector<FeatureKind> order,
                                          std::span<const double> effective) {
  if (order.size() != effective.size()) {
    throw ValidationError("weight count does not match plane count");
  }
  ThetaWeights t;
  t.plane_order = std::move(order);
  for (double e : effective) {
    if (!(e < 0.0) || !std::isfinite(e)) {
      throw ValidationError("effective weights must be finite and negative");
    }
    t.raw.push_back(std::log(-e));
  }
  return t;
}

std::vector<double> ThetaWeights::effective() const {
  std::vector<double> out;
  out.reserve(raw.size());
  for (double r : raw) out.push_back(-std::exp(r));
  return out;
}

bool ThetaWeights::has(FeatureKind kind) const {
  return std::find(plane_order.begin(), plane_order.end(), kind) !=
         plane_order.end();
}

ThetaWeights ThetaWeights::restrict_to(
    const std::vector<FeatureKind>& order) const {
  ThetaWeights out;
  out.plane_order = order;
  for (FeatureKind k : order) {
    auto it = std::find(plane_order.begin(), plane_order.end(), k);
    if (it == plane_order.end()) {
      throw ValidationError("weights have no entry for plane " +
                            std::string(feature_name(k)));
    }
    out.raw.push_back(raw[it - plane_order.begin()]);
  }
  return out;
}

void ThetaWeights::check_matches(const FeatureStack& stack) const {
  if (stack.plane_order() != plane_order || raw.size() != plane_order.size()) {
    throw ValidationError("weight plane order does not match the feature stack");
  }
}

namespace {

void validate_demos(const DemonstrationSet& set, const GridMap* fallback) {
  const auto& demos = set.demos;
  if (demos.empty()) throw ValidationError("demonstration set is empty");
  const auto order = demos.front().stack.plane_order();
  for (std::size_t i = 0; i < demos.size(); ++i) {
    const Demonstration& d = demos[i];
    if (!d.map && fallback == nullptr) {
      throw ValidationError(demo_context(i) + "has no map");
    }
    const GridMap& map = map_of(d, fallback);
    if (d.stack.plane_order() != order) {
      throw ValidationError(demo_context(i) + "plane order differs");
    }
    if (d.stack.width() != map.width() || d.stack.height() != map.height()) {
      throw ValidationError(demo_context(i) + "feature planes do not match map");
    }
    d.trajectory.validate(map);
    if (d.trajectory.states.back() != d.goal) {
      throw ValidationError(demo_context(i) + "does not end at its goal " +
                            to_string(d.goal));
    }
  }
}

}  // namespace

void DemonstrationSet::validate(const GridMap& map) const {
  validate_demos(*this, &map);
}

void DemonstrationSet::validate() const { validate_demos(*this, nullptr); }

std::vector<FeatureKind> DemonstrationSet::plane_order() const {
  if (demos.empty()) return {};
  return demos.front().stack.plane_order();
}

DemonstrationSet DemonstrationSet::with_fold(int fold) const {
  DemonstrationSet out;
  for (const auto& d : demos) {
    if (d.fold == fold) out.demos.push_back(d);
  }
  return out;
}

DemonstrationSet DemonstrationSet::without_fold(int fold) const {
  DemonstrationSet out;
  for (const auto& d : demos) {
    if (d.fold != fold) out.demos.push_back(d);
  }
  return out;
}

std::vector<double> trajectory_feature_counts(const FeatureStack& stack,
                                              const Trajectory& t, Cell goal) {
  std::vector<double> out(stack.size(), 0.0);
  for (const Cell& s : t.states) {
    if (s == goal) continue;
    for (std::size_t j = 0; j < stack.size(); ++j) {
      out[j] += stack.plane(j).values(s.x, s.y);
    }
  }
  return out;
}

std::vector<double> empirical_feature_counts(const DemonstrationSet& demos) {
  if (demos.demos.empty()) throw ValidationError("demonstration set is empty");
  const auto order = demos.plane_order();
  std::vector<double> out(order.size(), 0.0);
  for (std::size_t i = 0; i < demos.demos.size(); ++i) {
    const Demonstration& d = demos.demos[i];
    if (d.stack.plane_order() != order) {
      throw ValidationError(demo_context(i) + "plane order differs");
    }
    const auto c = trajectory_feature_counts(d.stack, d.trajectory, d.goal);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += c[j];
  }
  for (double& v : out) v /= static_cast<double>(demos.demos.size());
  return out;
}

ModelStatistics model_statistics(const GridMap& map,
                                 const DemonstrationSet& demos,
                                 std::span<const double> theta,
                                 const TrainConfig& config) {
  if (demos.demos.empty()) throw ValidationError("demonstration set is empty");
  if (theta.size() != demos.plane_order().size()) {
    throw ValidationError("weight count does not match plane count");
  }
  if (config.horizon == HorizonMode::kFixed && config.fixed_horizon < 0) {
    throw ValidationError("fixed horizon must be >= 0");
  }
  TrainConfig cold = config;
  cold.warm_start = false;
  Evaluator ev(&map, demos, cold);
  return ev.run(theta);
}

std::vector<double> expected_feature_counts(const GridMap& map,
                                            const ThetaWeights& theta,
                                            const DemonstrationSet& demos,
                                            const TrainConfig& config) {
  if (theta.plane_order != demos.plane_order()) {
    throw ValidationError("weight plane order does not match the demos");
  }
  return model_statistics(map, demos, theta.effective(), config).expected;
}

double log_likelihood(const GridMap& map, const ThetaWeights& theta,
                      const DemonstrationSet& demos, const TrainConfig& config) {
  if (theta.plane_order != demos.plane_order()) {
    throw ValidationError("weight plane order does not match the demos");
  }
  return model_statistics(map, demos, theta.effective(), config).log_likelihood;
}

namespace {

struct Curvature {
  std::vector<double> s, y;
  double rho = 0.0;
};

// Gradient of -LL with respect to raw: d(theta)/d(raw) = theta = -exp(raw).
std::vector<double> raw_gradient(const std::vector<double>& match,
                                 const std::vector<double>& raw) {
  std::vector<double> g(raw.size());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = match[j] * std::exp(raw[j]);
  return g;
}

std::vector<double> lbfgs_direction(std::vector<double> q,
                                    const std::vector<Curvature>& history) {
  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
    return s;
  };
  std::vector<double> alpha(history.size());
  for (std::size_t i = history.size(); i-- > 0;) {
    alpha[i] = history[i].rho * dot(history[i].s, q);
    for (std::size_t j = 0; j < q.size(); ++j) q[j] -= alpha[i] * history[i].y[j];
  }
  if (!history.empty()) {
    const auto& last = history.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (double& v : q) v *= gamma;
  }
  for (std::size_t i = 0; i < history.size(); ++i) {
    const double beta = history[i].rho * dot(history[i].y, q);
    for (std::size_t j = 0; j < q.size(); ++j) {
      q[j] += (alpha[i] - beta) * history[i].s[j];
    }
  }
  for (double& v : q) v = -v;
  return q;
}

TrainResult train_impl(const GridMap* map, const DemonstrationSet& demos,
                       const TrainConfig& config) {
  if (!(config.lr > 0.0)) throw ValidationError("learning rate must be > 0");
  if (config.max_epochs < 0) throw ValidationError("max_epochs must be >= 0");
  validate_demos(demos, map);

  const auto order = demos.plane_order();
  ThetaWeights theta;
  theta.plane_order = order;
  if (!config.initial_raw.empty()) {
    if (config.initial_raw.size() != order.size()) {
      throw ValidationError("initial weights do not match plane count");
    }
    theta.raw = config.initial_raw;
  } else {
    // Bias at -3 keeps the open-floor path sum finite with 9 actions.
    theta.raw.assign(order.size(), 0.0);
    if (order.front() == FeatureKind::kBias) theta.raw[0] = std::log(3.0);
  }

  // Lower bound on the bias raw weight, if any.
  std::optional<double> bias_floor;
  if (config.max_bias && order.front() == FeatureKind::kBias) {
    if (!(*config.max_bias < 0.0)) throw ValidationError("max_bias must be < 0");
    bias_floor = std::log(-*config.max_bias);
    theta.raw[0] = std::max(theta.raw[0], *bias_floor);
  }
  auto clamp = [&](std::vector<double>& raw) {
    if (bias_floor) raw[0] = std::max(raw[0], *bias_floor);
  };
  // Descent lowers raw where the gradient is positive; at the floor the bias
  // cannot move that way.
  auto blocked = [&](const std::vector<double>& raw, const std::vector<double>& g) {
    return bias_floor && raw[0] <= *bias_floor && g[0] > 0.0;
  };
  auto projected = [&](const std::vector<double>& raw, std::vector<double> g) {
    if (blocked(raw, g)) g[0] = 0.0;
    return g;
  };

  const std::vector<double> empirical = empirical_feature_counts(demos);
  Evaluator ev(map, demos, config);
  ModelStatistics stats = ev.run(theta.effective());

  auto gradient = [&](const ModelStatistics& s) {
    std::vector<double> g(order.size());
    for (std::size_t j = 0; j < g.size(); ++j) g[j] = empirical[j] - s.expected[j];
    return g;
  };

  TrainReport report;
  std::vector<double> grad = gradient(stats);
  double lr = config.lr;
  report.log_likelihood_trace.push_back(stats.log_likelihood);
  report.gradient_norm_trace.push_back(sup_norm(projected(theta.raw, grad)));
  report.raw_trace.push_back(theta.raw);

  const bool lbfgs = config.optimizer == Optimizer::kLbfgs;
  std::vector<Curvature> history;
  std::vector<double> direction;
  double step = 1.0;

  int epoch = 0;
  for (; epoch < config.max_epochs; ++epoch) {
    if (sup_norm(projected(theta.raw, grad)) < config.tol) {
      report.converged = true;
      break;
    }
    std::vector<double> candidate = theta.raw;
    double armijo = 0.0;
    if (lbfgs) {
      const auto g = projected(theta.raw, raw_gradient(grad, theta.raw));
      direction = lbfgs_direction(g, history);
      // Hold a blocked bias fixed; its zeroed gradient says nothing about
      // moving it up.
      if (blocked(theta.raw, grad)) direction[0] = 0.0;
      double big = sup_norm(direction);
      double scale = big > config.lbfgs_max_step ? config.lbfgs_max_step / big : 1.0;
      double slope = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) slope += g[j] * direction[j];
      if (!(slope < 0.0)) {
        // Not a descent direction: restart from steepest descent.
        history.clear();
        direction = g;
        for (double& d : direction) d = -d;
        big = sup_norm(direction);
        scale = big > config.lbfgs_max_step ? config.lbfgs_max_step / big : 1.0;
        slope = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) slope += g[j] * direction[j];
      }
      const double t = step * scale;
      for (std::size_t j = 0; j < grad.size(); ++j) candidate[j] += t * direction[j];
      clamp(candidate);
      double moved = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) {
        moved += g[j] * (candidate[j] - theta.raw[j]);
      }
      armijo = -1e-4 * moved;
    } else {
      for (std::size_t j = 0; j < grad.size(); ++j) candidate[j] -= lr * grad[j];
      clamp(candidate);
    }
    std::vector<double> eff(candidate.size());
    for (std::size_t j = 0; j < eff.size(); ++j) eff[j] = -std::exp(candidate[j]);

    ModelStatistics next;
    bool ok = true;
    try {
      next = ev.run(eff);
    } catch (const NumericalError& e) {
      if (!config.backtrack) {
        report.message = e.what();
        report.diverged = true;
        break;
      }
      ok = false;
    }
    if (ok && (config.backtrack || lbfgs) &&
        next.log_likelihood < stats.log_likelihood + armijo) {
      ok = false;
    }
    if (!ok) {
      ++report.rejected_steps;
      if (lbfgs) {
        step *= 0.5;
        if (step < 1e-12) {
          report.message = "step size underflow";
          break;
        }
      } else {
        lr *= 0.5;
        if (lr < config.lr * 1e-9) {
          report.message = "step size underflow";
          break;
        }
      }
      continue;
    }
    if (lbfgs) {
      const auto g_old = raw_gradient(grad, theta.raw);
      const auto g_new = raw_gradient(gradient(next), candidate);
      Curvature c;
      c.s.resize(g_old.size());
      c.y.resize(g_old.size());
      double sy = 0.0;
      for (std::size_t j = 0; j < g_old.size(); ++j) {
        c.s[j] = candidate[j] - theta.raw[j];
        c.y[j] = g_new[j] - g_old[j];
        sy += c.s[j] * c.y[j];
      }
      if (sy > 1e-12) {
        c.rho = 1.0 / sy;
        history.push_back(std::move(c));
        if (static_cast<int>(history.size()) > std::max(1, config.lbfgs_memory)) {
          history.erase(history.begin());
        }
      }
      step = 1.0;
    }
    theta.raw = std::move(candidate);
    stats = std::move(next);
    grad = gradient(stats);
    if (!lbfgs) {
      lr = std::min(std::max(config.max_lr, config.lr), lr * config.lr_growth);
    }
    report.log_likelihood_trace.push_back(stats.log_likelihood);
    report.gradient_norm_trace.push_back(sup_norm(projected(theta.raw, grad)));
    report.raw_trace.push_back(theta.raw);
    const auto& trace = report.gradient_norm_trace;
    if (trace.size() > 20 && trace.back() > 10.0 * trace[trace.size() - 21]) {
      report.diverged = true;
      report.message = "gradient norm grew tenfold over 20 epochs";
      break;
    }
  }
  if (!report.converged && !report.diverged &&
      sup_norm(projected(theta.raw, grad)) < config.tol) {
    report.converged = true;
  }
  report.iterations = epoch;
  report.final_gradient_norm = sup_norm(projected(theta.raw, grad));
  report.empirical = empirical;
  report.expected = stats.expected;
  report.per_feature_match.resize(grad.size());
  for (std::size_t j = 0; j < grad.size(); ++j) {
    report.per_feature_match[j] = std::abs(grad[j]);
  }
  report.final_lr = lr;
  if (report.converged && report.message.empty()) report.message = "converged";
  if (!report.converged && report.message.empty()) {
    report.message = "max_epochs reached";
  }
  return {std::move(theta), std::move(report)};
}

}  // namespace

TrainResult train(const GridMap& map, const DemonstrationSet& demos,
                  const TrainConfig& config) {
  return train_impl(&map, demos, config);
}

TrainResult train(const DemonstrationSet& demos, const TrainConfig& config) {
  return train_impl(nullptr, demos, config);
}

namespace {

Plane observed_occupancy(const GridMap& map, std::span<const Trajectory> tracks,
                         std::size_t skip) {
  Plane occ(map.width(), map.height());
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const Trajectory& t = tracks[i];
    if (i == skip || t.states.empty()) continue;
    const double w = 1.0 / static_cast<double>(t.states.size());
    for (const Cell& c : t.states) occ(c.x, c.y) += w;
  }
  return occ;
}

}  // namespace

std::array<PlanePtr, 3> observed_social_planes(
    const GridMap& map, std::span<const Trajectory> others,
    const ProxemicKernels& kernels) {
  const std::array<std::array<Plane, 3>, 1> raw{build_social_planes(
      observed_occupancy(map, others, others.size()), kernels, map.cell_size())};
  return SocialNormalizer::from_max(raw).apply(raw[0]);
}

std::vector<std::array<PlanePtr, 3>> episode_social_planes(
    const GridMap& map, std::span<const Trajectory> tracks,
    const ProxemicKernels& kernels) {
  std::vector<std::array<Plane, 3>> raw;
  raw.reserve(tracks.size());
  for (std::size_t k = 0; k < tracks.size(); ++k) {
    raw.push_back(build_social_planes(observed_occupancy(map, tracks, k),
                                      kernels, map.cell_size()));
  }
  const SocialNormalizer norm = SocialNormalizer::from_max(raw);
  std::vector<std::array<PlanePtr, 3>> out;
  out.reserve(raw.size());
  for (const auto& r : raw) out.push_back(norm.apply(r));
  return out;
}

int sample_action(std::span<const double> row, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  double acc = 0.0;
  int last = 0;
  for (int a = 0; a < static_cast<int>(row.size()); ++a) {
    if (row[a] <= 0.0) continue;
    acc += row[a];
    last = a;
    if (r < acc) return a;
  }
  return last;
}

Trajectory sample_trajectory(const GridMap& map, const Policy& policy,
                             Cell start, Cell goal, int max_steps,
                             std::mt19937_64& rng, int agent_id) {
  map.require_free(start, "start");
  Trajectory t;
  t.agent_id = agent_id;
  t.states.push_back(start);
  Cell x = start;
  for (int k = 0; k < max_steps && x != goal; ++k) {
    const int a = sample_action(policy.row(x), rng);
    x = map.cell(map.successor(map.index(x), a));
    t.actions.push_back(a);
    t.states.push_back(x);
  }
  return t;
}

}  // namespace fpf
