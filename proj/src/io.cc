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

#include "fpforecast/io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "fpforecast/errors.h"
#include "json.hpp"

namespace fpf {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& source, const std::string& path,
                       const std::string& msg) {
  throw ValidationError(source + ": " + (path.empty() ? "" : path + ": ") + msg);
}

json parse_json(std::string_view text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // what() carries line and column
    fail(source, "", e.what());
  }
}

// Field access with a dotted path for error messages.
struct Reader {
  const std::string& source;

  const json& need(const json& obj, const std::string& path, const char* key) const {
    if (!obj.is_object()) fail(source, path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(source, path, std::string("missing field '") + key + "'");
    return *it;
  }
  void only(const json& obj, const std::string& path,
            std::initializer_list<const char*> keys) const {
    if (!obj.is_object()) fail(source, path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (std::find_if(keys.begin(), keys.end(), [&](const char* k) {
            return it.key() == k;
          }) == keys.end()) {
        fail(source, path, "unknown field '" + it.key() + "'");
      }
    }
  }
  double number(const json& v, const std::string& path) const {
    if (!v.is_number()) fail(source, path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(source, path, "not finite");
    return d;
  }
  int integer(const json& v, const std::string& path) const {
    if (!v.is_number_integer()) fail(source, path, "expected an integer");
    return v.get<int>();
  }
  std::string string(const json& v, const std::string& path) const {
    if (!v.is_string()) fail(source, path, "expected a string");
    return v.get<std::string>();
  }
  const json& array(const json& v, const std::string& path) const {
    if (!v.is_array()) fail(source, path, "expected an array");
    return v;
  }
  Cell cell(const json& v, const std::string& path) const {
    if (!v.is_array() || v.size() != 2) fail(source, path, "expected [x, y]");
    return {integer(v[0], path + "[0]"), integer(v[1], path + "[1]")};
  }
  std::vector<double> numbers(const json& v, const std::string& path) const {
    std::vector<double> out;
    for (std::size_t i = 0; i < array(v, path).size(); ++i) {
      out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
  }
};

ordered_json cell_json(Cell c) { return ordered_json::array({c.x, c.y}); }

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path q(p);
  return q.is_absolute() ? q : base / q;
}

}  // namespace

std::string encode_rle_row(std::span<const std::uint8_t> row) {
  std::string out;
  std::size_t i = 0;
  while (i < row.size()) {
    std::size_t j = i;
    while (j < row.size() && (row[j] != 0) == (row[i] != 0)) ++j;
    out += std::to_string(j - i);
    out += row[i] ? '#' : '.';
    i = j;
  }
  return out;
}

std::vector<std::uint8_t> decode_rle_row(std::string_view row, int width) {
  std::vector<std::uint8_t> out;
  std::size_t i = 0;
  while (i < row.size()) {
    std::size_t j = i;
    while (j < row.size() && row[j] >= '0' && row[j] <= '9') ++j;
    if (j == i || j == row.size()) {
      throw ValidationError("bad run at offset " + std::to_string(i) + " in '" +
                            std::string(row) + "'");
    }
    long n = 0;
    std::from_chars(row.data() + i, row.data() + j, n);
    const char c = row[j];
    if (c != '.' && c != '#') {
      throw ValidationError(std::string("run symbol must be '.' or '#', got '") + c + "'");
    }
    if (n <= 0 || static_cast<long>(out.size()) + n > width) {
      throw ValidationError("row '" + std::string(row) + "' does not decode to " +
                            std::to_string(width) + " cells");
    }
    out.insert(out.end(), n, c == '#' ? 1 : 0);
    i = j + 1;
  }
  if (static_cast<int>(out.size()) != width) {
    throw ValidationError("row '" + std::string(row) + "' decodes to " +
                          std::to_string(out.size()) + " cells, expected " +
                          std::to_string(width));
  }
  return out;
}

std::string scenario_to_json(const Scenario& s) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = s.name;
  const GridMap& m = s.map;
  ordered_json grid;
  grid["width"] = m.width();
  grid["height"] = m.height();
  grid["cell_size_m"] = m.cell_size();
  ordered_json rows = ordered_json::array();
  const auto mask = m.obstacle_mask();
  for (int y = 0; y < m.height(); ++y) {
    rows.push_back(encode_rle_row(mask.subspan(static_cast<std::size_t>(y) * m.width(),
                                               m.width())));
  }
  grid["obstacles"] = rows;
  j["grid"] = grid;
  ordered_json agents = ordered_json::array();
  for (const auto& a : s.agents) {
    ordered_json aj;
    aj["id"] = a.id;
    aj["start"] = cell_json(a.start);
    ordered_json goals = ordered_json::array();
    for (const auto& g : a.goals) {
      ordered_json gj;
      gj["cell"] = cell_json(g.cell);
      gj["prior"] = g.prior;
      goals.push_back(gj);
    }
    aj["goals"] = goals;
    if (a.orientation) aj["orientation_rad"] = *a.orientation;
    if (a.attributes) {
      ordered_json at;
      at["male"] = a.attributes->male;
      at["female"] = a.attributes->female;
      at["old"] = a.attributes->old;
      at["young"] = a.attributes->young;
      aj["attributes"] = at;
    }
    agents.push_back(aj);
  }
  j["agents"] = agents;
  if (s.speed_stats) {
    ordered_json st;
    st["young"] = s.speed_stats->young;
    st["old"] = s.speed_stats->old;
    st["male"] = s.speed_stats->male;
    st["female"] = s.speed_stats->female;
    j["speed_stats"] = st;
  }
  j["notes"] = s.notes;
  return j.dump(2) + "\n";
}

Scenario scenario_from_json(std::string_view text, const std::string& source) {
  const json j = parse_json(text, source);
  const Reader r{source};
  r.only(j, "", {"schema_version", "name", "grid", "agents", "speed_stats", "notes"});
  const int version = r.integer(r.need(j, "", "schema_version"), "schema_version");
  if (version != kSchemaVersion) {
    fail(source, "schema_version", "unsupported version " + std::to_string(version));
  }
  Scenario s;
  if (j.contains("name")) s.name = r.string(j["name"], "name");
  if (j.contains("notes")) s.notes = r.string(j["notes"], "notes");

  const json& g = r.need(j, "", "grid");
  r.only(g, "grid", {"width", "height", "cell_size_m", "obstacles"});
  const int w = r.integer(r.need(g, "grid", "width"), "grid.width");
  const int h = r.integer(r.need(g, "grid", "height"), "grid.height");
  if (w <= 0 || h <= 0) fail(source, "grid", "width and height must be positive");
  const double cs = r.number(r.need(g, "grid", "cell_size_m"), "grid.cell_size_m");
  if (!(cs > 0.0)) fail(source, "grid.cell_size_m", "must be positive");
  const json& rows = r.array(r.need(g, "grid", "obstacles"), "grid.obstacles");
  if (static_cast<int>(rows.size()) != h) {
    fail(source, "grid.obstacles", "expected " + std::to_string(h) + " rows");
  }
  std::vector<std::uint8_t> mask;
  for (int y = 0; y < h; ++y) {
    const std::string path = "grid.obstacles[" + std::to_string(y) + "]";
    try {
      const auto row = decode_rle_row(r.string(rows[y], path), w);
      mask.insert(mask.end(), row.begin(), row.end());
    } catch (const ValidationError& e) {
      if (std::string_view(e.what()).starts_with(source)) throw;
      fail(source, path, e.what());
    }
  }
  s.map = GridMap(w, h, cs, std::move(mask));

  const json& agents = r.array(r.need(j, "", "agents"), "agents");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string p = "agents[" + std::to_string(i) + "]";
    const json& aj = agents[i];
    r.only(aj, p, {"id", "start", "goals", "orientation_rad", "attributes"});
    AgentProfile a;
    a.id = r.integer(r.need(aj, p, "id"), p + ".id");
    a.start = r.cell(r.need(aj, p, "start"), p + ".start");
    const json& goals = r.array(r.need(aj, p, "goals"), p + ".goals");
    for (std::size_t k = 0; k < goals.size(); ++k) {
      const std::string gp = p + ".goals[" + std::to_string(k) + "]";
      r.only(goals[k], gp, {"cell", "prior"});
      GoalHypothesis gh;
      gh.cell = r.cell(r.need(goals[k], gp, "cell"), gp + ".cell");
      gh.prior = r.number(r.need(goals[k], gp, "prior"), gp + ".prior");
      a.goals.push_back(gh);
    }
    if (aj.contains("orientation_rad")) {
      a.orientation = r.number(aj["orientation_rad"], p + ".orientation_rad");
    }
    if (aj.contains("attributes")) {
      const json& at = aj["attributes"];
      const std::string ap = p + ".attributes";
      r.only(at, ap, {"male", "female", "old", "young"});
      AttributeWeights wts;
      wts.male = r.number(r.need(at, ap, "male"), ap + ".male");
      wts.female = r.number(r.need(at, ap, "female"), ap + ".female");
      wts.old = r.number(r.need(at, ap, "old"), ap + ".old");
      wts.young = r.number(r.need(at, ap, "young"), ap + ".young");
      a.attributes = wts;
    }
    s.agents.push_back(std::move(a));
  }
  if (j.contains("speed_stats")) {
    const json& st = j["speed_stats"];
    r.only(st, "speed_stats", {"young", "old", "male", "female"});
    SpeedStats ss;
    ss.young = r.number(r.need(st, "speed_stats", "young"), "speed_stats.young");
    ss.old = r.number(r.need(st, "speed_stats", "old"), "speed_stats.old");
    ss.male = r.number(r.need(st, "speed_stats", "male"), "speed_stats.male");
    ss.female = r.number(r.need(st, "speed_stats", "female"), "speed_stats.female");
    s.speed_stats = ss;
  }
  try {
    s.validate();
  } catch (const ValidationError& e) {
    fail(source, "", e.what());
  }
  return s;
}

Scenario load_scenario(const fs::path& path) {
  return scenario_from_json(read_file(path), path.string());
}

void save_scenario(const Scenario& s, const fs::path& path) {
  write_file_atomic(path, scenario_to_json(s));
}

std::vector<WorldSample> parse_track_csv(std::string_view text, const std::string& source) {
  std::vector<WorldSample> out;
  std::size_t pos = 0;
  int line = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view l = text.substr(pos, end - pos);
    pos = end + 1;
    ++line;
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    if (line == 1) {
      if (l != "frame,agent_id,x,y") {
        fail(source, "line 1", "header must be 'frame,agent_id,x,y'");
      }
      continue;
    }
    if (l.empty()) continue;
    std::vector<std::string_view> f;
    for (std::size_t start = 0;;) {
      const std::size_t c = l.find(',', start);
      f.push_back(l.substr(start, c == std::string_view::npos ? c : c - start));
      if (c == std::string_view::npos) break;
      start = c + 1;
    }
    if (f.size() != 4) fail(source, "line " + std::to_string(line), "expected 4 fields");
    WorldSample s;
    auto parse = [&](std::string_view v, auto& dst) {
      const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), dst);
      if (ec != std::errc() || p != v.data() + v.size()) {
        fail(source, "line " + std::to_string(line), "bad field '" + std::string(v) + "'");
      }
    };
    parse(f[0], s.frame);
    parse(f[1], s.agent_id);
    parse(f[2], s.x);
    parse(f[3], s.y);
    if (!std::isfinite(s.x) || !std::isfinite(s.y)) {
      fail(source, "line " + std::to_string(line), "coordinates must be finite");
    }
    out.push_back(s);
  }
  if (line == 0) fail(source, "", "empty file");
  return out;
}

std::string track_csv(std::span<const WorldSample> rows) {
  std::string out = "frame,agent_id,x,y\n";
  for (const auto& r : rows) {
    out += std::to_string(r.frame) + "," + std::to_string(r.agent_id) + "," + g17(r.x) +
           "," + g17(r.y) + "\n";
  }
  return out;
}

int TrajectoryDataset::frames_per_step() const {
  return std::max(1, static_cast<int>(std::lround(frame_rate_hz * step_s)));
}

TrajectoryDataset load_dataset_manifest(const fs::path& path) {
  const std::string source = path.string();
  const json j = parse_json(read_file(path), source);
  const Reader r{source};
  r.only(j, "", {"schema_version", "frame_rate_hz", "step_s", "scale", "cases"});
  if (r.integer(r.need(j, "", "schema_version"), "schema_version") != kSchemaVersion) {
    fail(source, "schema_version", "unsupported version");
  }
  TrajectoryDataset d;
  d.frame_rate_hz = r.number(r.need(j, "", "frame_rate_hz"), "frame_rate_hz");
  d.step_s = r.number(r.need(j, "", "step_s"), "step_s");
  d.scale = r.number(r.need(j, "", "scale"), "scale");
  if (!(d.frame_rate_hz > 0.0) || !(d.step_s > 0.0) || !(d.scale > 0.0)) {
    fail(source, "", "frame_rate_hz, step_s and scale must be positive");
  }
  const fs::path base = path.parent_path();
  const json& cases = r.array(r.need(j, "", "cases"), "cases");
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const std::string p = "cases[" + std::to_string(i) + "]";
    r.only(cases[i], p, {"scenario", "episodes"});
    DatasetCase c;
    c.scenario = resolve(base, r.string(r.need(cases[i], p, "scenario"), p + ".scenario"));
    const json& eps = r.array(r.need(cases[i], p, "episodes"), p + ".episodes");
    for (std::size_t k = 0; k < eps.size(); ++k) {
      const std::string ep = p + ".episodes[" + std::to_string(k) + "]";
      r.only(eps[k], ep, {"csv", "fold"});
      DatasetEpisode e;
      e.csv = resolve(base, r.string(r.need(eps[k], ep, "csv"), ep + ".csv"));
      e.fold = r.integer(r.need(eps[k], ep, "fold"), ep + ".fold");
      c.episodes.push_back(e);
    }
    d.cases.push_back(std::move(c));
  }
  return d;
}

std::string dataset_manifest_json(const TrajectoryDataset& d) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["frame_rate_hz"] = d.frame_rate_hz;
  j["step_s"] = d.step_s;
  j["scale"] = d.scale;
  ordered_json cases = ordered_json::array();
  for (const auto& c : d.cases) {
    ordered_json cj;
    cj["scenario"] = c.scenario.generic_string();
    ordered_json eps = ordered_json::array();
    for (const auto& e : c.episodes) {
      ordered_json ej;
      ej["csv"] = e.csv.generic_string();
      ej["fold"] = e.fold;
      eps.push_back(ej);
    }
    cj["episodes"] = eps;
    cases.push_back(cj);
  }
  j["cases"] = cases;
  return j.dump(2) + "\n";
}

Trajectory discretize_track(const GridMap& map, int agent_id,
                            std::span<const WorldSample> samples, int frames_per_step,
                            double scale) {
  const std::string who = "agent " + std::to_string(agent_id);
  if (samples.empty()) throw ValidationError(who + ": empty track");
  if (frames_per_step < 1) throw ValidationError("frames_per_step must be >= 1");
  const long first = samples.front().frame;
  std::vector<Cell> states;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (i > 0 && s.frame <= samples[i - 1].frame) {
      throw ValidationError(who + ": frames not strictly increasing at frame " +
                            std::to_string(s.frame));
    }
    if ((s.frame - first) % frames_per_step != 0) continue;
    const Cell c{static_cast<int>(std::floor(s.x * scale / map.cell_size())),
                 static_cast<int>(std::floor(s.y * scale / map.cell_size()))};
    if (!map.is_free(c)) {
      throw ValidationError(who + ": frame " + std::to_string(s.frame) + " maps to " +
                            to_string(c) + ", which is not a free cell");
    }
    if (!states.empty()) {
      const Cell prev = states.back();
      const int dx = c.x - prev.x;
      const int dy = c.y - prev.y;
      const int d = std::max(std::abs(dx), std::abs(dy));
      for (int k = 1; k < d; ++k) {
        const Cell mid{prev.x + static_cast<int>(std::lround(static_cast<double>(k) * dx / d)),
                       prev.y + static_cast<int>(std::lround(static_cast<double>(k) * dy / d))};
        if (!map.is_free(mid)) {
          throw ValidationError(who + ": jump " + to_string(prev) + " -> " + to_string(c) +
                                " crosses blocked cell " + to_string(mid));
        }
        states.push_back(mid);
      }
    }
    states.push_back(c);
  }
  return trajectory_from_states(map, agent_id, std::move(states));
}

std::vector<EvalCase> discretize_trajectories(const TrajectoryDataset& dataset) {
  std::vector<EvalCase> out;
  for (const auto& dc : dataset.cases) {
    EvalCase c;
    c.scenario = load_scenario(dc.scenario);
    int id = 0;
    for (const auto& de : dc.episodes) {
      const auto rows = parse_track_csv(read_file(de.csv), de.csv.string());
      std::map<int, std::vector<WorldSample>> by_agent;
      for (const auto& r : rows) by_agent[r.agent_id].push_back(r);
      Episode e;
      e.id = id++;
      e.fold = de.fold;
      for (const auto& [agent, samples] : by_agent) {
        try {
          c.scenario.agent(agent);
          e.tracks.push_back(discretize_track(c.scenario.map, agent, samples,
                                              dataset.frames_per_step(), dataset.scale));
        } catch (const ValidationError& err) {
          throw ValidationError(de.csv.string() + ": " + err.what());
        }
      }
      c.episodes.push_back(std::move(e));
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<WorldSample> render_track(const GridMap& map, const Trajectory& t, double scale) {
  std::vector<WorldSample> out;
  for (std::size_t k = 0; k < t.states.size(); ++k) {
    out.push_back({static_cast<long>(k), t.agent_id,
                   (t.states[k].x + 0.5) * map.cell_size() / scale,
                   (t.states[k].y + 0.5) * map.cell_size() / scale});
  }
  return out;
}

void save_dataset(std::span<const EvalCase> cases, const fs::path& dir) {
  fs::create_directories(dir);
  TrajectoryDataset d;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    char stem[256];
    std::snprintf(stem, sizeof stem, "%02zu_%s", i, c.scenario.name.c_str());
    DatasetCase dc;
    dc.scenario = std::string(stem) + ".json";
    save_scenario(c.scenario, dir / dc.scenario);
    for (const auto& e : c.episodes) {
      std::vector<WorldSample> rows;
      for (const auto& t : e.tracks) {
        const auto r = render_track(c.scenario.map, t);
        rows.insert(rows.end(), r.begin(), r.end());
      }
      std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return a.frame < b.frame;
      });
      const std::string csv = std::string(stem) + "_e" + std::to_string(e.id) + ".csv";
      write_file_atomic(dir / csv, track_csv(rows));
      dc.episodes.push_back({csv, e.fold});
    }
    d.cases.push_back(std::move(dc));
  }
  write_file_atomic(dir / "manifest.json", dataset_manifest_json(d));
}

namespace {

ordered_json theta_core(const ThetaWeights& theta) {
  ordered_json j;
  ordered_json order = ordered_json::array();
  for (FeatureKind k : theta.plane_order) order.push_back(std::string(feature_name(k)));
  j["plane_order"] = order;
  j["raw"] = theta.raw;
  return j;
}

}  // namespace

std::string theta_to_json(const ThetaWeights& theta, const TrainReport* report) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  const ordered_json core = theta_core(theta);
  j["plane_order"] = core["plane_order"];
  j["raw"] = core["raw"];
  j["effective"] = theta.effective();
  if (report != nullptr) {
    ordered_json r;
    r["iterations"] = report->iterations;
    r["converged"] = report->converged;
    r["diverged"] = report->diverged;
    r["final_gradient_norm"] = report->final_gradient_norm;
    r["per_feature_match"] = report->per_feature_match;
    r["empirical"] = report->empirical;
    r["expected"] = report->expected;
    r["final_lr"] = report->final_lr;
    r["rejected_steps"] = report->rejected_steps;
    r["log_likelihood_trace"] = report->log_likelihood_trace;
    r["gradient_norm_trace"] = report->gradient_norm_trace;
    r["message"] = report->message;
    j["train_report"] = r;
  }
  return j.dump(2) + "\n";
}

ThetaWeights theta_from_json(std::string_view text, const std::string& source) {
  const json j = parse_json(text, source);
  const Reader r{source};
  r.only(j, "", {"schema_version", "plane_order", "raw", "effective", "train_report"});
  if (r.integer(r.need(j, "", "schema_version"), "schema_version") != kSchemaVersion) {
    fail(source, "schema_version", "unsupported version");
  }
  ThetaWeights t;
  const json& order = r.array(r.need(j, "", "plane_order"), "plane_order");
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::string p = "plane_order[" + std::to_string(i) + "]";
    try {
      t.plane_order.push_back(feature_from_name(r.string(order[i], p)));
    } catch (const ValidationError& e) {
      if (std::string_view(e.what()).starts_with(source)) throw;
      fail(source, p, e.what());
    }
  }
  t.raw = r.numbers(r.need(j, "", "raw"), "raw");
  if (t.raw.size() != t.plane_order.size() || t.raw.empty()) {
    fail(source, "raw", "needs one entry per plane");
  }
  for (std::size_t i = 1; i < t.plane_order.size(); ++i) {
    if (t.plane_order[i] <= t.plane_order[i - 1]) {
      fail(source, "plane_order", "planes must be unique and in canonical order");
    }
  }
  return t;
}

ThetaWeights load_theta(const fs::path& path) {
  return theta_from_json(read_file(path), path.string());
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string theta_hash(const ThetaWeights& theta) {
  return hex64(fnv1a64(theta_core(theta).dump()));
}

std::string plane_pgm(const Plane& p) {
  std::string out = "P5\n" + std::to_string(p.width()) + " " +
                    std::to_string(p.height()) + "\n255\n";
  const double mx = p.size() ? p.max() : 0.0;
  for (double v : p.values()) {
    long q = mx > 0.0 ? std::lround(255.0 * v / mx) : 0;
    out.push_back(static_cast<char>(std::clamp(q, 0L, 255L)));
  }
  return out;
}

void write_forecast_dir(const ForecastResult& r, const ThetaWeights& theta,
                        const ForecastRun& run, const fs::path& dir) {
  fs::create_directories(dir);
  const FPConfig& c = run.config;
  ordered_json m;
  m["schema_version"] = kSchemaVersion;
  m["scenario"] = run.scenario_name;
  m["scenario_hash"] = run.scenario_hash;
  m["model"] = r.model;
  m["W"] = c.window;
  m["tau"] = c.period;
  m["T"] = r.horizon;
  if (!r.agents.empty() && !r.agents.front().per_step.empty()) {
    const Plane& p0 = r.agents.front().per_step.front();
    m["grid"] = {{"width", p0.width()}, {"height", p0.height()}};
  }
  m["rounds"] = r.rounds;
  m["features"] = c.features.to_string();
  m["individual_speed"] = c.individual_speed;
  m["constant_speed"] = c.constant_speed;
  m["gauss_seidel"] = c.gauss_seidel;
  m["lookahead"] = c.lookahead;
  m["sweep"] = c.sweep == SweepOrder::kRandom ? "random" : "ascending_id";
  m["seed"] = c.seed;
  m["vi"] = {{"max_iter", c.vi.max_iter}, {"tol", c.vi.tol}};
  m["proxemic_radii_m"] = c.kernels.radii_m;
  m["theta_hash"] = theta_hash(theta);
  m["theta"] = theta_core(theta);
  m["social_divisors"] = r.social_divisors;
  if (r.agents.size() >= 2) {
    m["scr_mode"] = run.scr_mode == ScrMode::kLiteral ? "literal" : "pairwise";
    m["scr"] = compute_scr(r, run.scr_mode);
  }
  ordered_json log = ordered_json::array();
  for (const auto& e : r.round_log) {
    log.push_back({{"round", e.round},
                   {"start_step", e.start_step},
                   {"steps", e.steps},
                   {"utility_updates", e.utility_updates}});
  }
  m["round_log"] = log;
  ordered_json agents = ordered_json::array();
  for (const auto& a : r.agents) {
    const std::string stem = "agent_" + std::to_string(a.id);
    write_file_atomic(dir / (stem + ".pgm"), plane_pgm(a.cumulative));
    std::string csv = "t,x,y,p\n";
    for (std::size_t t = 0; t < a.per_step.size(); ++t) {
      const Plane& p = a.per_step[t];
      for (int y = 0; y < p.height(); ++y) {
        for (int x = 0; x < p.width(); ++x) {
          if (p(x, y) != 0.0) {
            csv += std::to_string(t) + "," + std::to_string(x) + "," + std::to_string(y) +
                   "," + g17(p(x, y)) + "\n";
          }
        }
      }
    }
    write_file_atomic(dir / (stem + "_visitation.csv"), csv);
    ordered_json aj;
    aj["id"] = a.id;
    aj["speed"] = a.speed;
    aj["macro_len"] = a.macro_len;
    ordered_json goals = ordered_json::array();
    for (const auto& g : a.goals) goals.push_back({{"cell", cell_json(g.cell)}, {"prior", g.prior}});
    aj["goals"] = goals;
    aj["heatmap"] = stem + ".pgm";
    aj["visitation"] = stem + "_visitation.csv";
    agents.push_back(aj);
  }
  m["agents"] = agents;
  write_file_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ValidationError("cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw ValidationError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace fpf
