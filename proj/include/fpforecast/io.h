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

#ifndef FPFORECAST_IO_H_
#define FPFORECAST_IO_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fpforecast/forecaster.h"
#include "fpforecast/ioc.h"
#include "fpforecast/metrics.h"
#include "fpforecast/scenario.h"

namespace fpf {

inline constexpr int kSchemaVersion = 1;

// Obstacle rows as runs of "<count><'.'|'#'>", e.g. "3#4.3#".
std::string encode_rle_row(std::span<const std::uint8_t> row);
std::vector<std::uint8_t> decode_rle_row(std::string_view row, int width);

// Canonical scenario JSON: fixed key order, two-space indent, trailing LF.
std::string scenario_to_json(const Scenario& s);
// Throws ValidationError naming the offending field; `source` prefixes the
// messages.
Scenario scenario_from_json(std::string_view text, const std::string& source = "scenario");

Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

// One CSV row: frame,agent_id,x,y in world units.
struct WorldSample {
  long frame = 0;
  int agent_id = 0;
  double x = 0.0;
  double y = 0.0;
};

std::vector<WorldSample> parse_track_csv(std::string_view text,
                                         const std::string& source = "csv");
std::string track_csv(std::span<const WorldSample> rows);

struct DatasetEpisode {
  std::filesystem::path csv;
  int fold = 0;
};

struct DatasetCase {
  std::filesystem::path scenario;
  std::vector<DatasetEpisode> episodes;
};

struct TrajectoryDataset {
  double frame_rate_hz = 1.0;
  // Seconds per lattice step; frames are kept every round(rate * step).
  double step_s = 1.0;
  // World units to metres.
  double scale = 1.0;
  std::vector<DatasetCase> cases;

  int frames_per_step() const;
};

// Relative paths in the manifest resolve against its directory.
TrajectoryDataset load_dataset_manifest(const std::filesystem::path& path);
std::string dataset_manifest_json(const TrajectoryDataset& d);

// Snaps one agent's samples (frames strictly increasing) to cells and infers
// actions. Frames off the step grid are dropped; jumps of more than one cell
// are split by rounding the straight line between the cells.
Trajectory discretize_track(const GridMap& map, int agent_id,
                            std::span<const WorldSample> samples,
                            int frames_per_step = 1, double scale = 1.0);

// Reads every scenario and CSV of the dataset. Each CSV is one episode;
// agent ids must belong to the scenario.
std::vector<EvalCase> discretize_trajectories(const TrajectoryDataset& dataset);

// Cell-centre samples, one frame per step, so that discretizing them gives
// the track back.
std::vector<WorldSample> render_track(const GridMap& map, const Trajectory& t,
                                      double scale = 1.0);

// Writes scenarios, episode CSVs and a manifest for the cases.
void save_dataset(std::span<const EvalCase> cases, const std::filesystem::path& dir);

// {plane_order, raw, effective[, train_report]}.
std::string theta_to_json(const ThetaWeights& theta,
                          const TrainReport* report = nullptr);
ThetaWeights theta_from_json(std::string_view text, const std::string& source = "theta");
ThetaWeights load_theta(const std::filesystem::path& path);

// 64-bit FNV-1a, printed as 16 lowercase hex digits.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);
// Hash of the plane order and raw weights only.
std::string theta_hash(const ThetaWeights& theta);

// Binary PGM, values scaled by the plane maximum to 0..255.
std::string plane_pgm(const Plane& p);

struct ForecastRun {
  std::string scenario_name;
  std::string scenario_hash;
  FPConfig config;
  ScrMode scr_mode = ScrMode::kPairwise;
};

// manifest.json, agent_<id>.pgm (cumulative) and agent_<id>_visitation.csv
// (t,x,y,p over nonzero cells) for every agent.
void write_forecast_dir(const ForecastResult& r, const ThetaWeights& theta,
                        const ForecastRun& run, const std::filesystem::path& dir);

// Write to a sibling temp file, then rename over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace fpf

#endif  // FPFORECAST_IO_H_
