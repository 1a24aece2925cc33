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

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "crushmi/analysis.hpp"
#include "crushmi/engine.hpp"
#include "crushmi/params.hpp"
#include "crushmi/scenario.hpp"

namespace crushmi {

struct RunResult {
  std::string scenario_id;
  std::string params_id;
  std::uint64_t seed = 0;
  int population = 0;
  MIConfig mi;
  DetectorConfig detector;
  MetricsSeries series;
  std::optional<double> total_evac_time_s;  // nullopt: building not empty at the end
  std::vector<AlarmInterval> alarms;
  double peak_force_N = 0.0;
  double peak_force_t_s = 0.0;
  double max_wall_overlap_m = 0.0;
  long wall_crossings = 0;
  std::optional<std::string> halt;  // set when the engine stopped early

  /// Per-exit cumulative counts at 1 s resolution, [exit][record].
  std::vector<std::vector<int>> leaving_profile() const;
};

struct RunOptions {
  DetectorConfig detector;
  /// Called after every step with the post-step frame.
  std::function<void(const SimFrame&)> observer;
  /// If set, trajectory rows and step metrics are appended here.
  std::string* trajectory_csv = nullptr;
  std::string* step_metrics_csv = nullptr;
};

/// Observation list (x, y, heading) of a frame.
std::vector<Observation> observe(const SimFrame& frame);

/// Runs one simulation to empty building or max_time_s. Engine halts are
/// caught; the partial result is returned with `halt` set.
RunResult run(const Scenario& scenario, const SfmParams& params, const MIConfig& mi_cfg, const RunOptions& options = {});

struct SeriesDelta {
  double t_s = 0.0;
  std::optional<double> mi_delta;     // b - a
  std::optional<double> force_delta;  // b - a
};

struct RunComparison {
  double window_from_s = 0.0;
  double window_to_s = 0.0;
  std::vector<SeriesDelta> deltas;
  std::optional<double> mean_mi_a;
  std::optional<double> mean_mi_b;
  double peak_force_a = 0.0;
  double peak_force_b = 0.0;
  double peak_force_t_a = 0.0;
  double peak_force_t_b = 0.0;
  bool a_more_ordered = false;       // mean MI over the window: a > b
  bool b_higher_peak_force = false;  // peak averaged force: b > a
};

/// Aligns two runs on t_s and compares them over [from_s, to_s].
RunComparison compare_runs(const RunResult& a, const RunResult& b, double from_s = 40.0, double to_s = 110.0);

/// Mean of defined mi_bits with t_s in [from_s, to_s].
std::optional<double> window_mean_mi(const MetricsSeries& s, double from_s, double to_s);

/// Stable JSON serialization of a run; byte-identical for identical runs.
std::string run_result_to_json(const RunResult& r);
RunResult run_result_from_json(const std::string& text);
std::string comparison_to_json(const RunComparison& c);

}  // namespace crushmi
