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

#include "fpforecast/cli.h"

#include <omp.h>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "fpforecast/baselines.h"
#include "fpforecast/errors.h"
#include "fpforecast/io.h"
#include "fpforecast/metrics.h"
#include "fpforecast/suite.h"
#include "json.hpp"

namespace fpf {

namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string model = "fp";
  std::string windows = "3";
  std::string periods = "1";
  int horizon = 0;
  std::string features = "occ,dog,bod,soc";
  bool scr_literal = false;
  bool no_dest = false;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;
};

std::vector<int> int_list(const std::string& text, const char* flag) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int v = 0;
    const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || p != item.data() + item.size() || v < 1) {
      throw ValidationError(std::string(flag) + ": expected positive integers, got '" +
                            text + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ValidationError(std::string(flag) + " is empty");
  return out;
}

int single(const std::string& text, const char* flag) {
  const auto v = int_list(text, flag);
  if (v.size() != 1) throw ValidationError(std::string(flag) + " takes one value here");
  return v.front();
}

FPConfig fp_config(const Globals& g) {
  FPConfig c;
  c.window = single(g.windows, "--W");
  c.period = single(g.periods, "--tau");
  c.horizon = g.horizon;
  c.features = FeatureToggles::parse(g.features);
  c.seed = g.seed;
  return c;
}

EvalOptions eval_options(const Globals& g) {
  EvalOptions o;
  o.scr = g.scr_literal ? ScrMode::kLiteral : ScrMode::kPairwise;
  return o;
}

std::vector<EvalCase> load_cases(const std::string& manifest, int fold) {
  auto cases = discretize_trajectories(load_dataset_manifest(manifest));
  if (fold >= 0) cases = filter_folds(cases, [fold](int f) { return f == fold; });
  if (cases.empty()) throw ValidationError("no episodes selected from " + manifest);
  return cases;
}

// Report to --out (or stdout when unset) plus the text table on stdout.
void emit(const Globals& g, const std::string& json, const std::string& text) {
  if (g.out.empty()) {
    std::cout << json;
  } else {
    write_file_atomic(g.out, json);
    std::cout << text;
  }
}

int run_train(const Globals& g, const std::string& data, int holdout,
              const std::string& optimizer, int epochs, double tol) {
  auto cases = discretize_trajectories(load_dataset_manifest(data));
  if (holdout >= 0) cases = filter_folds(cases, [holdout](int f) { return f != holdout; });
  if (cases.empty()) throw ValidationError("no training episodes left");
  const ModelKind model = model_from_name(g.model);
  FPConfig cfg = fp_config(g);
  cfg.individual_speed = model == ModelKind::kFPSpeed;
  const auto demos = build_demonstrations(cases, model_toggles(model, cfg.features), cfg);
  TrainConfig tc;
  if (optimizer == "lbfgs") {
    tc.optimizer = Optimizer::kLbfgs;
  } else if (optimizer == "eg") {
    tc.optimizer = Optimizer::kExponentiatedGradient;
  } else {
    throw ValidationError("--optimizer must be eg or lbfgs");
  }
  tc.max_epochs = epochs;
  tc.tol = tol;
  const TrainResult r = train(demos, tc);
  const std::string json = theta_to_json(r.theta, &r.report);
  if (g.out.empty()) {
    std::cout << json;
  } else {
    write_file_atomic(g.out, json);
  }
  std::fprintf(stderr, "train: %zu demos, %d iterations, %s, gradient %.3g\n",
               demos.demos.size(), r.report.iterations,
               r.report.converged ? "converged" : "not converged",
               r.report.final_gradient_norm);
  return 0;
}

int run_forecast(const Globals& g, const std::string& scenario_path,
                 const std::string& theta_path) {
  if (g.out.empty()) throw ValidationError("forecast needs --out <dir>");
  const Scenario s = load_scenario(scenario_path);
  const ThetaWeights theta = load_theta(theta_path);
  FPConfig cfg = fp_config(g);
  if (cfg.horizon == 0) cfg.horizon = 30;
  if (s.speed_stats) cfg.speed_stats = *s.speed_stats;
  const ModelKind model = model_from_name(g.model);
  const ForecastResult r = forecast(model, s.map, s.agents, theta, cfg);
  ForecastRun run;
  run.scenario_name = s.name;
  run.scenario_hash = hex64(fnv1a64(scenario_to_json(s)));
  run.config = cfg;
  run.scr_mode = g.scr_literal ? ScrMode::kLiteral : ScrMode::kPairwise;
  write_forecast_dir(r, theta, run, g.out);
  std::printf("%s: %zu agents, T=%d, %d rounds -> %s\n", r.model.c_str(), r.agents.size(),
              r.horizon, r.rounds, g.out.c_str());
  return 0;
}

int run_eval(const Globals& g, const std::string& data, const std::string& theta_path,
             int fold, int stride) {
  const auto cases = load_cases(data, fold);
  const ThetaWeights theta = load_theta(theta_path);
  const ModelKind model = model_from_name(g.model);
  const FPConfig cfg = fp_config(g);
  const MetricReport rep = g.no_dest
                               ? evaluate_no_dest(model, cases, theta, cfg, stride,
                                                  eval_options(g))
                               : evaluate(model, cases, theta, cfg, eval_options(g));
  const std::vector<MetricReport> rows{rep};
  emit(g, report_json(rep), report_text(rows));
  return 0;
}

int run_ablate(const Globals& g, const std::string& data, const std::string& theta_path,
               int fold, const std::string& row_spec) {
  const auto cases = load_cases(data, fold);
  const ThetaWeights theta = load_theta(theta_path);
  std::vector<AblationRow> rows;
  std::stringstream ss(row_spec);
  std::string item;
  while (std::getline(ss, item, ';')) {
    AblationRow r;
    r.toggles = FeatureToggles::parse(item);
    r.theta = theta.restrict_to(plane_order_for(r.toggles));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ValidationError("--rows is empty");
  const auto out = run_ablation(cases, rows, fp_config(g), eval_options(g));
  emit(g, ablation_json(out), ablation_text(out));
  for (const auto& e : out) {
    if (e.identity_checked && !e.identity_holds) {
      throw NumericalError("FP and nMDP differ without social planes for " + e.features);
    }
  }
  return 0;
}

int run_gridsearch(const Globals& g, const std::string& data, const std::string& theta_path,
                   int fold) {
  const auto cases = load_cases(data, fold);
  const ThetaWeights theta = load_theta(theta_path);
  const auto windows = int_list(g.windows, "--W");
  const auto periods = int_list(g.periods, "--tau");
  FPConfig cfg;
  cfg.horizon = g.horizon;
  cfg.features = FeatureToggles::parse(g.features);
  cfg.seed = g.seed;
  const auto t = grid_search(model_from_name(g.model), cases, theta, cfg, windows, periods,
                             eval_options(g));
  emit(g, grid_json(t), grid_text(t));
  return 0;
}

int run_synth(const Globals& g, int episodes, int folds) {
  if (g.out.empty()) throw ValidationError("synth needs --out <dir>");
  SuiteOptions so;
  so.seed = g.seed;
  so.episodes = episodes;
  so.folds = folds;
  const auto cases = synthetic_suite(so);
  save_dataset(cases, g.out);
  std::size_t tracks = 0;
  for (const auto& c : cases) tracks += c.track_count();
  std::printf("synth: %zu scenarios, %zu tracks -> %s\n", cases.size(), tracks,
              g.out.c_str());
  return 0;
}

// Static planes of a scenario, or per-step visitation of a forecast dir.
int run_render(const Globals& g, const std::string& scenario_path,
               const std::string& result_dir) {
  if (g.out.empty()) throw ValidationError("render needs --out <dir>");
  if (scenario_path.empty() == result_dir.empty()) {
    throw ValidationError("render takes exactly one of --scenario and --result");
  }
  fs::create_directories(g.out);
  const fs::path out(g.out);
  if (!scenario_path.empty()) {
    const Scenario s = load_scenario(scenario_path);
    Plane walls(s.map.width(), s.map.height());
    for (int i = 0; i < s.map.num_cells(); ++i) walls[i] = s.map.obstacle_mask()[i];
    write_file_atomic(out / "map.pgm", plane_pgm(walls));
    FeatureToggles t = FeatureToggles::parse(g.features);
    t.social = false;
    t.collision_region = false;
    PlaneCache cache(s.map);
    for (const auto& a : s.agents) {
      const FeatureStack stack = static_stack(cache, a, a.goals.front().cell, t);
      for (std::size_t j = 0; j < stack.size(); ++j) {
        write_file_atomic(out / ("agent_" + std::to_string(a.id) + "_" +
                                 std::string(stack.plane(j).name()) + ".pgm"),
                          plane_pgm(stack.plane(j).values));
      }
    }
    return 0;
  }
  const fs::path dir(result_dir);
  const auto m = nlohmann::json::parse(read_file(dir / "manifest.json"));
  const int w = m.at("grid").at("width");
  const int h = m.at("grid").at("height");
  const int horizon = m.at("T");
  for (const auto& a : m.at("agents")) {
    const int id = a.at("id");
    std::vector<Plane> steps(horizon + 1, Plane(w, h));
    std::stringstream csv(read_file(dir / a.at("visitation").get<std::string>()));
    std::string line;
    std::getline(csv, line);
    while (std::getline(csv, line)) {
      int t = 0, x = 0, y = 0;
      double p = 0.0;
      if (std::sscanf(line.c_str(), "%d,%d,%d,%lf", &t, &x, &y, &p) != 4 || t < 0 ||
          t > horizon || x < 0 || y < 0 || x >= w || y >= h) {
        throw ValidationError("bad visitation row '" + line + "'");
      }
      steps[t](x, y) = p;
    }
    for (int t = 0; t <= horizon; ++t) {
      char name[64];
      std::snprintf(name, sizeof name, "agent_%d_t%03d.pgm", id, t);
      write_file_atomic(out / name, plane_pgm(steps[t]));
    }
  }
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Multi-agent trajectory forecasting by fictitious play", "fpforecast"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--model", g.model, "fp, fp-speed, nmdp, mdpcv or mta")
      ->capture_default_str();
  app.add_option("--W", g.windows, "forecasting window (comma list for gridsearch)")
      ->capture_default_str();
  app.add_option("--tau", g.periods, "replanning period (comma list for gridsearch)")
      ->capture_default_str();
  app.add_option("--T", g.horizon, "horizon; 0 means the longest demo (30 for forecast)")
      ->capture_default_str();
  app.add_option("--features", g.features, "planes from occ,dog,bod,soc,cv")
      ->capture_default_str();
  app.add_flag("--scr-literal", g.scr_literal, "product over all agents instead of pairs");
  app.add_flag("--no-dest", g.no_dest, "forecast over a grid of goal hypotheses");
  app.add_option("--seed", g.seed)->capture_default_str();
  app.add_option("--threads", g.threads, "OpenMP threads; 0 keeps the default")
      ->capture_default_str();
  app.add_option("--out", g.out, "output file or directory");

  std::string data, theta, scenario, result, optimizer = "lbfgs";
  std::string rows = "occ;occ,dog;occ,dog,bod;occ,dog,bod,soc";
  int holdout = -1, fold = -1, epochs = 200, stride = 4, episodes = 10, folds = 5;
  double tol = 1e-2;

  auto* train_cmd = app.add_subcommand("train", "maxent IOC on a dataset manifest");
  train_cmd->add_option("--data", data, "dataset manifest")->required();
  train_cmd->add_option("--holdout", holdout, "fold left out of training");
  train_cmd->add_option("--optimizer", optimizer, "eg or lbfgs")->capture_default_str();
  train_cmd->add_option("--epochs", epochs)->capture_default_str();
  train_cmd->add_option("--tol", tol)->capture_default_str();

  auto* forecast_cmd = app.add_subcommand("forecast", "scenario + weights -> result dir");
  forecast_cmd->add_option("--scenario", scenario)->required();
  forecast_cmd->add_option("--theta", theta)->required();

  auto* eval_cmd = app.add_subcommand("eval", "NLL and SCR of one model");
  auto* ablate_cmd = app.add_subcommand("ablate", "feature ablation, FP vs nMDP");
  auto* grid_cmd = app.add_subcommand("gridsearch", "W x tau table");
  for (auto* c : {eval_cmd, ablate_cmd, grid_cmd}) {
    c->add_option("--data", data, "dataset manifest")->required();
    c->add_option("--theta", theta)->required();
    c->add_option("--fold", fold, "evaluate only this fold");
  }
  eval_cmd->add_option("--goal-stride", stride, "goal grid stride with --no-dest")
      ->capture_default_str();
  ablate_cmd->add_option("--rows", rows, "';'-separated feature lists")
      ->capture_default_str();

  auto* synth_cmd = app.add_subcommand("synth", "write the synthetic suite");
  synth_cmd->add_option("--episodes", episodes)->capture_default_str();
  synth_cmd->add_option("--folds", folds)->capture_default_str();

  auto* render_cmd = app.add_subcommand("render", "planes -> PGM");
  render_cmd->add_option("--scenario", scenario, "static feature planes of each agent");
  render_cmd->add_option("--result", result, "per-step visitation of a forecast dir");

  for (auto* c : app.get_subcommands({})) c->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  try {
    if (g.threads < 0) throw ValidationError("--threads must be >= 0");
    if (g.threads > 0) omp_set_num_threads(g.threads);
    if (*train_cmd) return run_train(g, data, holdout, optimizer, epochs, tol);
    if (*forecast_cmd) return run_forecast(g, scenario, theta);
    if (*eval_cmd) return run_eval(g, data, theta, fold, stride);
    if (*ablate_cmd) return run_ablate(g, data, theta, fold, rows);
    if (*grid_cmd) return run_gridsearch(g, data, theta, fold);
    if (*synth_cmd) return run_synth(g, episodes, folds);
    if (*render_cmd) return run_render(g, scenario, result);
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace fpf
