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

#include "fpforecast/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>

#include "fpforecast/errors.h"
#include "json.hpp"

namespace fpf {

void Scenario::validate() const {
  if (agents.empty()) throw ValidationError("scenario '" + name + "' has no agents");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    agents[i].validate(map);
    for (std::size_t j = i + 1; j < agents.size(); ++j) {
      if (agents[i].id == agents[j].id) {
        throw ValidationError("duplicate agent id " + std::to_string(agents[i].id));
      }
    }
  }
  if (speed_stats) speed_stats->validate();
}

const AgentProfile& Scenario::agent(int id) const {
  for (const auto& a : agents) {
    if (a.id == id) return a;
  }
  throw ValidationError("scenario '" + name + "' has no agent " + std::to_string(id));
}

std::size_t EvalCase::track_count() const {
  std::size_t n = 0;
  for (const auto& e : episodes) n += e.tracks.size();
  return n;
}

int EvalCase::longest_track() const {
  int longest = 0;
  for (const auto& e : episodes) {
    for (const auto& t : e.tracks) longest = std::max(longest, static_cast<int>(t.length()));
  }
  return longest;
}

NllResult compute_nll(const ForecastResult& result, const Trajectory& demo) {
  const AgentForecast* agent = nullptr;
  for (const auto& a : result.agents) {
    if (a.id == demo.agent_id) agent = &a;
  }
  if (agent == nullptr) {
    throw ValidationError("no forecast for agent " + std::to_string(demo.agent_id));
  }
  if (static_cast<int>(demo.length()) > result.horizon) {
    throw ValidationError("demo of agent " + std::to_string(demo.agent_id) +
                          " is longer than the forecast horizon");
  }
  NllResult out;
  const int w = agent->per_step.front().width();
  const int h = agent->per_step.front().height();
  for (std::size_t t = 0; t < demo.length(); ++t) {
    const Cell x = demo.states[t];
    if (x.x < 0 || x.y < 0 || x.x >= w || x.y >= h) {
      throw ValidationError("demo state " + to_string(x) + " is outside the grid");
    }
    const int r = result.round_for_step(static_cast<int>(t));
    double p = 0.0;
    for (std::size_t g = 0; g < agent->goals.size(); ++g) {
      const auto& rounds = agent->policies[g];
      if (rounds.empty()) throw ValidationError("missing policy for a demo step");
      const Policy& pol = *rounds[std::min<std::size_t>(r, rounds.size() - 1)];
      p += agent->goals[g].prior * pol.prob(x, demo.actions[t]);
    }
    if (!(p > 0.0)) {
      out.sentinel = true;
      out.value = kNllSentinel;
      return out;
    }
    out.value -= std::log(p);
  }
  return out;
}

double compute_scr(const ForecastResult& result, ScrMode mode) {
  const std::size_t n = result.agents.size();
  if (n < 2) throw ValidationError("collision rate needs at least two agents");
  const std::size_t steps = result.agents.front().per_step.size();
  for (const auto& a : result.agents) {
    if (a.per_step.size() != steps) {
      throw ValidationError("agents have different forecast lengths");
    }
  }
  const std::size_t cells = result.agents.front().per_step.front().size();
  double total = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t x = 0; x < cells; ++x) {
      if (mode == ScrMode::kLiteral) {
        double prod = 1.0;
        for (const auto& a : result.agents) prod *= a.per_step[t][x];
        total += prod;
      } else {
        for (std::size_t i = 0; i < n; ++i) {
          const double di = result.agents[i].per_step[t][x];
          if (di == 0.0) continue;
          for (std::size_t j = i + 1; j < n; ++j) {
            total += di * result.agents[j].per_step[t][x];
          }
        }
      }
    }
  }
  return total;
}

GoalHypothesisGrid GoalHypothesisGrid::make(const GridMap& map, int stride) {
  if (stride < 1) throw ValidationError("goal stride must be >= 1");
  GoalHypothesisGrid grid;
  grid.stride = stride;
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const Cell c{x, y};
      if (!map.is_free(c)) continue;
      const bool lattice = x % stride == 0 && y % stride == 0;
      const bool border =
          x == 0 || y == 0 || x == map.width() - 1 || y == map.height() - 1;
      if (lattice || border) grid.cells.push_back(c);
    }
  }
  if (grid.cells.empty()) throw ValidationError("goal hypothesis grid is empty");
  return grid;
}

std::vector<GoalHypothesis> GoalHypothesisGrid::hypotheses() const {
  std::vector<GoalHypothesis> out;
  const double p = 1.0 / static_cast<double>(cells.size());
  for (Cell c : cells) out.push_back({c, p});
  return out;
}

namespace {

ScenarioMetrics evaluate_case(ModelKind model, const EvalCase& c,
                              const ThetaWeights& theta, const FPConfig& config,
                              const EvalOptions& options) {
  c.scenario.validate();
  Scenario sc = c.scenario;
  if (options.no_dest_stride) {
    const auto hyp = GoalHypothesisGrid::make(sc.map, *options.no_dest_stride).hypotheses();
    for (auto& a : sc.agents) a.goals = hyp;
  }
  FPConfig cfg = config;
  if (sc.speed_stats) cfg.speed_stats = *sc.speed_stats;
  if (cfg.horizon <= 0) {
    cfg.horizon = std::max(c.longest_track(), cfg.period);
  }
  const ForecastResult result =
      forecast(model, sc.map, sc.agents, theta, cfg, options.mta_lookahead);
  ScenarioMetrics m;
  m.name = sc.name;
  for (const auto& e : c.episodes) {
    for (const auto& d : e.tracks) {
      d.validate(sc.map);
      const NllResult nll = compute_nll(result, d);
      m.nll += nll.value;
      m.nll_sentinel = m.nll_sentinel || nll.sentinel;
      ++m.trajectories;
    }
  }
  if (m.trajectories > 0) m.nll /= m.trajectories;
  m.scr = result.agents.size() >= 2 ? compute_scr(result, options.scr) : 0.0;
  return m;
}

}  // namespace

MetricReport evaluate(ModelKind model, std::span<const EvalCase> cases,
                      const ThetaWeights& theta, const FPConfig& config,
                      const EvalOptions& options) {
  if (cases.empty()) throw ValidationError("no evaluation cases");
  MetricReport report;
  report.model = std::string(model_name(model));
  report.window = config.window;
  report.period = config.period;
  report.features = model_toggles(model, config.features).to_string();
  report.no_dest = options.no_dest_stride.has_value();
  report.scr_literal = options.scr == ScrMode::kLiteral;
  report.per_scenario.resize(cases.size());

  std::vector<std::exception_ptr> errors(cases.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < cases.size(); ++i) {
    try {
      report.per_scenario[i] = evaluate_case(model, cases[i], theta, config, options);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (!errors[i]) continue;
    const std::string where = "scenario '" + cases[i].scenario.name + "'";
    try {
      std::rethrow_exception(errors[i]);
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError(where + ": " + e.what());
    }
  }
  double nll_sum = 0.0;
  double scr_sum = 0.0;
  for (const auto& m : report.per_scenario) {
    nll_sum += m.nll * m.trajectories;
    scr_sum += m.scr;
    report.trajectories += m.trajectories;
    report.nll_sentinel = report.nll_sentinel || m.nll_sentinel;
  }
  report.nll = report.trajectories > 0 ? nll_sum / report.trajectories : 0.0;
  report.scr = scr_sum / static_cast<double>(cases.size());
  return report;
}

MetricReport evaluate_no_dest(ModelKind model, std::span<const EvalCase> cases,
                              const ThetaWeights& theta, const FPConfig& config,
                              int stride, EvalOptions options) {
  options.no_dest_stride = stride;
  return evaluate(model, cases, theta, config, options);
}

GridSearchTable grid_search(ModelKind model, std::span<const EvalCase> cases,
                            const ThetaWeights& theta, const FPConfig& config,
                            std::span<const int> windows,
                            std::span<const int> periods,
                            const EvalOptions& options) {
  if (windows.empty() || periods.empty()) {
    throw ValidationError("grid search needs at least one W and one tau");
  }
  GridSearchTable t;
  t.model = std::string(model_name(model));
  t.windows.assign(windows.begin(), windows.end());
  t.periods.assign(periods.begin(), periods.end());
  for (int w : windows) {
    for (int p : periods) {
      GridCell cell;
      cell.window = w;
      cell.period = p;
      FPConfig c = config;
      c.window = w;
      c.period = p;
      try {
        cell.report = evaluate(model, cases, theta, c, options);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      t.cells.push_back(std::move(cell));
    }
  }
  return t;
}

std::vector<AblationEntry> run_ablation(std::span<const EvalCase> cases,
                                        std::span<const AblationRow> rows,
                                        const FPConfig& config,
                                        const EvalOptions& options) {
  std::vector<AblationEntry> out;
  for (const auto& row : rows) {
    if (row.theta.plane_order != plane_order_for(row.toggles)) {
      throw ValidationError("ablation row '" + row.toggles.to_string() +
                            "': weights do not match its planes");
    }
    FPConfig c = config;
    c.features = row.toggles;
    AblationEntry e;
    e.features = row.toggles.to_string();
    e.fp = evaluate(ModelKind::kFP, cases, row.theta, c, options);
    e.nmdp = evaluate(ModelKind::kNMDP, cases, row.theta, c, options);
    if (row.theta_mta) e.mta = evaluate(ModelKind::kMTA, cases, *row.theta_mta, c, options);
    if (!row.toggles.social) {
      e.identity_checked = true;
      e.identity_holds = e.fp.nll == e.nmdp.nll && e.fp.scr == e.nmdp.scr;
      for (std::size_t i = 0; i < e.fp.per_scenario.size(); ++i) {
        e.identity_holds = e.identity_holds &&
                           e.fp.per_scenario[i].nll == e.nmdp.per_scenario[i].nll &&
                           e.fp.per_scenario[i].scr == e.nmdp.per_scenario[i].scr;
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

namespace {

using nlohmann::ordered_json;

ordered_json to_json(const MetricReport& r) {
  ordered_json j;
  j["model"] = r.model;
  j["W"] = r.window;
  j["tau"] = r.period;
  j["features"] = r.features;
  j["no_dest"] = r.no_dest;
  j["scr_mode"] = r.scr_literal ? "literal" : "pairwise";
  j["nll"] = r.nll;
  j["nll_definition"] = "mean over trajectories of the per-trajectory sum";
  j["nll_sentinel"] = r.nll_sentinel;
  j["scr"] = r.scr;
  j["trajectories"] = r.trajectories;
  ordered_json per = ordered_json::array();
  for (const auto& m : r.per_scenario) {
    ordered_json s;
    s["name"] = m.name;
    s["nll"] = m.nll;
    s["scr"] = m.scr;
    s["trajectories"] = m.trajectories;
    s["nll_sentinel"] = m.nll_sentinel;
    per.push_back(std::move(s));
  }
  j["per_scenario"] = std::move(per);
  return j;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::string report_json(const MetricReport& r) { return to_json(r).dump(2) + "\n"; }

std::string report_text(std::span<const MetricReport> rows) {
  std::ostringstream out;
  out << pad("model", 10) << pad("W", 4) << pad("tau", 5) << pad("no-dest", 9)
      << pad("NLL", 12) << pad("SCR", 10) << "  features\n";
  for (const auto& r : rows) {
    out << pad(r.model, 10) << pad(std::to_string(r.window), 4)
        << pad(std::to_string(r.period), 5) << pad(r.no_dest ? "yes" : "no", 9)
        << pad(fixed(r.nll, 3) + (r.nll_sentinel ? "*" : ""), 12)
        << pad(fixed(r.scr, 4), 10) << "  " << r.features << "\n";
  }
  return out.str();
}

std::string report_csv(std::span<const MetricReport> rows) {
  std::ostringstream out;
  out << "model,W,tau,features,no_dest,scr_mode,scenario,nll,scr,trajectories,"
         "nll_sentinel\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    const char* mode = r.scr_literal ? "literal" : "pairwise";
    for (const auto& m : r.per_scenario) {
      out << r.model << ',' << r.window << ',' << r.period << ',' << r.features
          << ',' << (r.no_dest ? 1 : 0) << ',' << mode << ',' << m.name << ',' << num(m.nll) << ','
          << num(m.scr) << ',' << m.trajectories << ',' << (m.nll_sentinel ? 1 : 0)
          << "\n";
    }
    out << r.model << ',' << r.window << ',' << r.period << ',' << r.features
        << ',' << (r.no_dest ? 1 : 0) << ',' << mode << ",ALL," << num(r.nll) << ',' << num(r.scr)
        << ',' << r.trajectories << ',' << (r.nll_sentinel ? 1 : 0) << "\n";
  }
  return out.str();
}

std::string grid_json(const GridSearchTable& t) {
  ordered_json j;
  j["model"] = t.model;
  j["W"] = t.windows;
  j["tau"] = t.periods;
  ordered_json nll = ordered_json::array();
  ordered_json scr = ordered_json::array();
  ordered_json errors = ordered_json::array();
  for (std::size_t i = 0; i < t.windows.size(); ++i) {
    ordered_json nrow = ordered_json::array();
    ordered_json srow = ordered_json::array();
    for (std::size_t k = 0; k < t.periods.size(); ++k) {
      const GridCell& c = t.at(i, k);
      if (c.report) {
        nrow.push_back(c.report->nll);
        srow.push_back(c.report->scr);
      } else {
        nrow.push_back(nullptr);
        srow.push_back(nullptr);
        errors.push_back({{"W", c.window}, {"tau", c.period}, {"error", c.error}});
      }
    }
    nll.push_back(std::move(nrow));
    scr.push_back(std::move(srow));
  }
  j["nll"] = std::move(nll);
  j["scr"] = std::move(scr);
  j["errors"] = std::move(errors);
  return j.dump(2) + "\n";
}

std::string grid_text(const GridSearchTable& t) {
  std::ostringstream out;
  for (int metric = 0; metric < 2; ++metric) {
    out << (metric == 0 ? "NLL" : "SCR") << " (" << t.model << ")\n";
    out << pad("W\\tau", 7);
    for (int p : t.periods) out << pad(std::to_string(p), 10);
    out << "\n";
    for (std::size_t i = 0; i < t.windows.size(); ++i) {
      out << pad(std::to_string(t.windows[i]), 7);
      for (std::size_t k = 0; k < t.periods.size(); ++k) {
        const GridCell& c = t.at(i, k);
        if (!c.report) {
          out << pad("fail", 10);
        } else {
          out << pad(metric == 0 ? fixed(c.report->nll, 3) : fixed(c.report->scr, 4), 10);
        }
      }
      out << "\n";
    }
    out << "\n";
  }
  return out.str();
}

std::string ablation_json(std::span<const AblationEntry> rows) {
  ordered_json j = ordered_json::array();
  for (const auto& e : rows) {
    ordered_json r;
    r["features"] = e.features;
    r["fp"] = to_json(e.fp);
    r["nmdp"] = to_json(e.nmdp);
    if (e.mta) r["mta"] = to_json(*e.mta);
    r["identity_checked"] = e.identity_checked;
    r["identity_holds"] = e.identity_holds;
    j.push_back(std::move(r));
  }
  return j.dump(2) + "\n";
}

std::string ablation_text(std::span<const AblationEntry> rows) {
  std::ostringstream out;
  out << pad("features", 18) << pad("NLL fp", 10) << pad("NLL mta", 10)
      << pad("NLL nmdp", 10) << pad("SCR fp", 9) << pad("SCR mta", 9)
      << pad("SCR nmdp", 9) << "\n";
  for (const auto& e : rows) {
    out << pad(e.features, 18) << pad(fixed(e.fp.nll, 3), 10)
        << pad(e.mta ? fixed(e.mta->nll, 3) : "-", 10) << pad(fixed(e.nmdp.nll, 3), 10)
        << pad(fixed(e.fp.scr, 4), 9) << pad(e.mta ? fixed(e.mta->scr, 4) : "-", 9)
        << pad(fixed(e.nmdp.scr, 4), 9);
    if (e.identity_checked && !e.identity_holds) out << "  (fp != nmdp)";
    out << "\n";
  }
  return out.str();
}

}  // namespace fpf
