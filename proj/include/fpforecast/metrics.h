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

#ifndef FPFORECAST_METRICS_H_
#define FPFORECAST_METRICS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fpforecast/baselines.h"
#include "fpforecast/forecaster.h"
#include "fpforecast/scenario.h"

namespace fpf {

inline constexpr double kNllSentinel = 1e9;

struct NllResult {
  double value = 0.0;
  // A demo action had zero probability; value holds the sentinel.
  bool sentinel = false;
};

// -sum_t log sum_g p(g) pi_g^(round(t))(a_t | x_t) for the forecast agent
// with the demo's agent id.
NllResult compute_nll(const ForecastResult& result, const Trajectory& demo);

enum class ScrMode { kPairwise, kLiteral };

// Pairwise: sum_t sum_x sum_{n<m} D_n(x) D_m(x). Literal: sum_t sum_x
// prod_n D_n(x). Needs at least two agents.
double compute_scr(const ForecastResult& result, ScrMode mode = ScrMode::kPairwise);

// Candidate goals for forecasting without destinations: free cells on the
// stride sub-lattice plus all free border cells, uniform prior.
struct GoalHypothesisGrid {
  int stride = 4;
  std::vector<Cell> cells;

  static GoalHypothesisGrid make(const GridMap& map, int stride = 4);
  std::vector<GoalHypothesis> hypotheses() const;
};

struct ScenarioMetrics {
  std::string name;
  double nll = 0.0;  // mean of per-trajectory sums
  double scr = 0.0;
  int trajectories = 0;
  bool nll_sentinel = false;
};

struct MetricReport {
  std::string model;
  int window = 0;
  int period = 0;
  std::string features;
  bool no_dest = false;
  bool scr_literal = false;
  double nll = 0.0;  // mean over all trajectories
  double scr = 0.0;  // mean over scenarios
  int trajectories = 0;
  bool nll_sentinel = false;
  std::vector<ScenarioMetrics> per_scenario;
};

struct EvalOptions {
  ScrMode scr = ScrMode::kPairwise;
  bool mta_lookahead = false;
  // When set, each agent's goals are replaced by this grid's hypotheses.
  std::optional<int> no_dest_stride;
};

// Forecast every case and score its demos. A config horizon of 0 means the
// longest demo of each case.
MetricReport evaluate(ModelKind model, std::span<const EvalCase> cases,
                      const ThetaWeights& theta, const FPConfig& config,
                      const EvalOptions& options = {});

MetricReport evaluate_no_dest(ModelKind model, std::span<const EvalCase> cases,
                              const ThetaWeights& theta, const FPConfig& config,
                              int stride = 4, EvalOptions options = {});

struct GridCell {
  int window = 0;
  int period = 0;
  std::optional<MetricReport> report;
  std::string error;
};

struct GridSearchTable {
  std::string model;
  std::vector<int> windows;
  std::vector<int> periods;
  // cells[i * periods.size() + j] for windows[i], periods[j].
  std::vector<GridCell> cells;

  const GridCell& at(std::size_t i, std::size_t j) const {
    return cells[i * periods.size() + j];
  }
};

// Full W x tau cross product; failures are recorded per cell.
GridSearchTable grid_search(ModelKind model, std::span<const EvalCase> cases,
                            const ThetaWeights& theta, const FPConfig& config,
                            std::span<const int> windows,
                            std::span<const int> periods,
                            const EvalOptions& options = {});

struct AblationRow {
  FeatureToggles toggles;
  ThetaWeights theta;  // covers the row's planes
  std::optional<ThetaWeights> theta_mta;
};

struct AblationEntry {
  std::string features;
  MetricReport fp;
  MetricReport nmdp;
  std::optional<MetricReport> mta;
  // Without f_soc, FP and nMDP reports must agree exactly.
  bool identity_checked = false;
  bool identity_holds = true;
};

std::vector<AblationEntry> run_ablation(std::span<const EvalCase> cases,
                                        std::span<const AblationRow> rows,
                                        const FPConfig& config,
                                        const EvalOptions& options = {});

// Report output.
std::string report_json(const MetricReport& r);
std::string report_text(std::span<const MetricReport> rows);
std::string report_csv(std::span<const MetricReport> rows);
std::string grid_json(const GridSearchTable& t);
std::string grid_text(const GridSearchTable& t);
std::string ablation_json(std::span<const AblationEntry> rows);
std::string ablation_text(std::span<const AblationEntry> rows);

}  // namespace fpf

#endif  // FPFORECAST_METRICS_H_
