/*
 * Copyright 2026 The crushmi Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "crushmi/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "json.hpp"

namespace crushmi {

std::vector<std::vector<int>> RunResult::leaving_profile() const {
  std::vector<std::vector<int>> out(series.exit_ids.size());
  for (const MetricsRecord& r : series.records) {
    for (std::size_t e = 0; e < out.size() && e < r.exits_cumulative.size(); ++e) out[e].push_back(r.exits_cumulative[e]);
  }
  return out;
}

std::vector<Observation> observe(const SimFrame& frame) {
  std::vector<Observation> out;
  out.reserve(frame.agents.size());
  for (const AgentState& a : frame.agents) out.push_back({a.position.x, a.position.y, a.heading});
  return out;
}

namespace {

StepMetrics step_metrics(const SimFrame& f, const MIConfig& cfg, const Rect& bounds, std::span<const Observation> crowd) {
  StepMetrics m;
  m.step = f.step;
  m.t = f.t;
  m.mi_bits = crowd_order_parameter(crowd, cfg, bounds);
  m.contact_force_sum = f.per_step_contact_force_sum;
  m.agents = static_cast<int>(f.agents.size());
  m.exits_cumulative = f.exits_log;
  return m;
}

void check_inputs(const Scenario& s, const SfmParams& params, const MIConfig& cfg) {
  std::vector<Violation> v = validate_scenario(s, params.traits.radius_max_m);
  for (const std::string& p : cfg.problems()) v.push_back({"mi", p});
  if (v.empty() && cfg.window_steps != s.steps_per_second()) {
    v.push_back({"mi.window_steps", "window must span exactly one simulated second (" +
                                        std::to_string(s.steps_per_second()) + " steps at this dt)"});
  }
  if (!v.empty()) throw ValidationError(std::move(v));
  check_params(params);
}

}  // namespace

RunResult run(const Scenario& scenario, const SfmParams& params, const MIConfig& mi_cfg, const RunOptions& options) {
  check_inputs(scenario, params, mi_cfg);

  RunResult result;
  result.scenario_id = scenario.id;
  result.params_id = params.id;
  result.seed = scenario.rng_seed;
  result.population = scenario.population;
  result.mi = mi_cfg;
  result.detector = options.detector;

  std::vector<std::string> exit_ids;
  for (const Exit& e : scenario.floorplan.exits) exit_ids.push_back(e.id);
  SeriesBuilder builder(exit_ids, mi_cfg.window_steps, scenario.dt_s);
  const Rect& bounds = scenario.floorplan.bounds;

  if (options.trajectory_csv) *options.trajectory_csv += trajectory_header();
  if (options.step_metrics_csv) *options.step_metrics_csv += step_metrics_header(exit_ids);

  try {
    const Engine engine(scenario, params);
    if (scenario.population == 0) {
      result.total_evac_time_s = 0.0;
    } else {
      SimFrame frame = engine.initial_frame();
      const long max_steps = std::lround(scenario.max_time_s / scenario.dt_s);
      std::vector<int> ids;
      while (frame.step < max_steps) {
        const StepReport rep = engine.advance(frame);
        result.max_wall_overlap_m = std::max(result.max_wall_overlap_m, rep.max_wall_overlap);
        result.wall_crossings += rep.wall_crossings;

        const std::vector<Observation> crowd = observe(frame);
        const StepMetrics m = step_metrics(frame, mi_cfg, bounds, crowd);
        builder.add(m);
        if (options.trajectory_csv) {
          ids.clear();
          for (const AgentState& a : frame.agents) ids.push_back(a.id);
          append_trajectory_rows(*options.trajectory_csv, frame.t, ids, crowd);
        }
        if (options.step_metrics_csv) append_step_metrics_row(*options.step_metrics_csv, m);
        if (options.observer) options.observer(frame);
        if (frame.agents.empty()) {
          result.total_evac_time_s = frame.t;
          break;
        }
      }
    }
  } catch (const SimulationHalt& h) {
    result.halt = h.what();
  }

  result.series = builder.finish();
  result.alarms = detect_crush(result.series, options.detector);
  for (const MetricsRecord& r : result.series.records) {
    if (r.avg_force_N && *r.avg_force_N > result.peak_force_N) {
      result.peak_force_N = *r.avg_force_N;
      result.peak_force_t_s = r.t_s;
    }
  }
  return result;
}

std::optional<double> window_mean_mi(const MetricsSeries& s, double from_s, double to_s) {
  double sum = 0.0;
  int n = 0;
  for (const MetricsRecord& r : s.records) {
    if (r.t_s >= from_s && r.t_s <= to_s && r.mi_bits) {
      sum += *r.mi_bits;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

RunComparison compare_runs(const RunResult& a, const RunResult& b, double from_s, double to_s) {
  RunComparison c;
  c.window_from_s = from_s;
  c.window_to_s = to_s;
  std::map<double, const MetricsRecord*> bt;
  for (const MetricsRecord& r : b.series.records) bt[r.t_s] = &r;
  for (const MetricsRecord& ra : a.series.records) {
    const auto it = bt.find(ra.t_s);
    if (it == bt.end()) continue;
    const MetricsRecord& rb = *it->second;
    SeriesDelta d{ra.t_s, std::nullopt, std::nullopt};
    if (ra.mi_bits && rb.mi_bits) d.mi_delta = *rb.mi_bits - *ra.mi_bits;
    if (ra.avg_force_N && rb.avg_force_N) d.force_delta = *rb.avg_force_N - *ra.avg_force_N;
    c.deltas.push_back(d);
  }
  c.mean_mi_a = window_mean_mi(a.series, from_s, to_s);
  c.mean_mi_b = window_mean_mi(b.series, from_s, to_s);
  c.peak_force_a = a.peak_force_N;
  c.peak_force_b = b.peak_force_N;
  c.peak_force_t_a = a.peak_force_t_s;
  c.peak_force_t_b = b.peak_force_t_s;
  c.a_more_ordered = c.mean_mi_a && c.mean_mi_b && *c.mean_mi_a > *c.mean_mi_b;
  c.b_higher_peak_force = c.peak_force_b > c.peak_force_a;
  return c;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

using ojson = nlohmann::ordered_json;

ojson opt(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

std::optional<double> opt_from(const ojson& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

std::string run_result_to_json(const RunResult& r) {
  ojson j;
  j["schema"] = "crushmi.run_result/1";
  j["scenario_id"] = r.scenario_id;
  j["params_id"] = r.params_id;
  j["seed"] = r.seed;
  j["population"] = r.population;
  j["mi"] = {{"x_bins", r.mi.x_bins},
             {"y_bins", r.mi.y_bins},
             {"theta_bins", r.mi.theta_bins},
             {"window_steps", r.mi.window_steps},
             {"min_agents", r.mi.min_agents}};
  j["detector"] = {{"mi_threshold_bits", r.detector.mi_threshold_bits},
                   {"sustain_s", r.detector.sustain_s},
                   {"min_agents", r.detector.min_agents}};
  j["total_evac_time_s"] = opt(r.total_evac_time_s);
  j["peak_force_N"] = r.peak_force_N;
  j["peak_force_t_s"] = r.peak_force_t_s;
  j["max_wall_overlap_m"] = r.max_wall_overlap_m;
  j["wall_crossings"] = r.wall_crossings;
  j["halt"] = r.halt ? ojson(*r.halt) : ojson(nullptr);
  ojson alarms = ojson::array();
  for (const AlarmInterval& a : r.alarms) alarms.push_back({{"start_s", a.start_s}, {"end_s", a.end_s}});
  j["alarms"] = alarms;
  j["exit_ids"] = r.series.exit_ids;
  ojson profile = ojson::object();
  const auto lp = r.leaving_profile();
  for (std::size_t e = 0; e < lp.size(); ++e) profile[r.series.exit_ids[e]] = lp[e];
  j["leaving_profile"] = profile;
  ojson recs = ojson::array();
  for (const MetricsRecord& m : r.series.records) {
    recs.push_back({{"t_s", m.t_s},
                    {"mi_bits", opt(m.mi_bits)},
                    {"avg_force_N", opt(m.avg_force_N)},
                    {"agents_remaining", m.agents_remaining},
                    {"exits_cumulative", m.exits_cumulative}});
  }
  j["series"] = recs;
  return j.dump(2) + "\n";
}

RunResult run_result_from_json(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw ParseError(std::string("run result: ") + e.what());
  }
  try {
    RunResult r;
    r.scenario_id = j.at("scenario_id").get<std::string>();
    r.params_id = j.at("params_id").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.population = j.at("population").get<int>();
    const ojson& mi = j.at("mi");
    r.mi = {mi.at("x_bins").get<int>(), mi.at("y_bins").get<int>(), mi.at("theta_bins").get<int>(),
            mi.at("window_steps").get<int>(), mi.at("min_agents").get<int>()};
    const ojson& det = j.at("detector");
    r.detector = {det.at("mi_threshold_bits").get<double>(), det.at("sustain_s").get<double>(),
                  det.at("min_agents").get<int>()};
    r.total_evac_time_s = opt_from(j.at("total_evac_time_s"));
    r.peak_force_N = j.at("peak_force_N").get<double>();
    r.peak_force_t_s = j.at("peak_force_t_s").get<double>();
    r.max_wall_overlap_m = j.at("max_wall_overlap_m").get<double>();
    r.wall_crossings = j.at("wall_crossings").get<long>();
    if (!j.at("halt").is_null()) r.halt = j.at("halt").get<std::string>();
    for (const ojson& a : j.at("alarms")) r.alarms.push_back({a.at("start_s").get<double>(), a.at("end_s").get<double>()});
    r.series.exit_ids = j.at("exit_ids").get<std::vector<std::string>>();
    for (const ojson& m : j.at("series")) {
      MetricsRecord rec;
      rec.t_s = m.at("t_s").get<double>();
      rec.mi_bits = opt_from(m.at("mi_bits"));
      rec.avg_force_N = opt_from(m.at("avg_force_N"));
      rec.agents_remaining = m.at("agents_remaining").get<int>();
      rec.exits_cumulative = m.at("exits_cumulative").get<std::vector<int>>();
      r.series.records.push_back(std::move(rec));
    }
    return r;
  } catch (const ojson::exception& e) {
    throw ParseError(std::string("run result: ") + e.what());
  }
}

std::string comparison_to_json(const RunComparison& c) {
  ojson j;
  j["schema"] = "crushmi.comparison/1";
  j["window"] = {c.window_from_s, c.window_to_s};
  j["mean_mi_a"] = opt(c.mean_mi_a);
  j["mean_mi_b"] = opt(c.mean_mi_b);
  j["peak_force_a"] = c.peak_force_a;
  j["peak_force_t_a"] = c.peak_force_t_a;
  j["peak_force_b"] = c.peak_force_b;
  j["peak_force_t_b"] = c.peak_force_t_b;
  j["a_more_ordered"] = c.a_more_ordered;
  j["b_higher_peak_force"] = c.b_higher_peak_force;
  ojson deltas = ojson::array();
  for (const SeriesDelta& d : c.deltas) {
    deltas.push_back({{"t_s", d.t_s}, {"mi_delta", opt(d.mi_delta)}, {"force_delta", opt(d.force_delta)}});
  }
  j["deltas"] = deltas;
  return j.dump(2) + "\n";
}

}  // namespace crushmi
