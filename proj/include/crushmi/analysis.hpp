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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crushmi/geometry.hpp"

namespace crushmi {

/// Joint counts of two discrete channels, row-major a_bins x b_bins.
class JointHistogram {
 public:
  JointHistogram(int a_bins, int b_bins);

  void add(int a, int b, std::int64_t count = 1);

  int a_bins() const { return a_bins_; }
  int b_bins() const { return b_bins_; }
  std::int64_t n() const { return n_; }
  std::int64_t at(int a, int b) const { return joint_[index(a, b)]; }
  std::vector<std::int64_t> a_marginal() const;
  std::vector<std::int64_t> b_marginal() const;
  JointHistogram transposed() const;

 private:
  std::size_t index(int a, int b) const {
    return static_cast<std::size_t>(a) * static_cast<std::size_t>(b_bins_) + static_cast<std::size_t>(b);
  }

  int a_bins_;
  int b_bins_;
  std::int64_t n_ = 0;
  std::vector<std::int64_t> joint_;
};

/// Plug-in mutual information in units of log base `log_base`. Zero cells
/// contribute nothing and the result is clamped at 0. nullopt when n == 0.
std::optional<double> mutual_information(const JointHistogram& h, double log_base = 2.0);

/// Plug-in entropy of the row (a) or column (b) channel in bits; nullopt when n == 0.
std::optional<double> entropy_a(const JointHistogram& h);
std::optional<double> entropy_b(const JointHistogram& h);

struct MIConfig {
  int x_bins = 8;
  int y_bins = 8;
  int theta_bins = 8;
  int window_steps = 100;
  int min_agents = 10;  // fewer agents than this: the order parameter is undefined

  /// Empty iff every field is in range.
  std::vector<std::string> problems() const;
};

/// One observed individual: position and heading in [-pi, pi).
struct Observation {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

/// Bin of `v` among `bins` equal bins over [lo, hi); values outside are clamped.
int bin_of(double v, double lo, double hi, int bins);

/// Mean of I(X, Theta) and I(Y, Theta) in bits over the given population.
/// nullopt with fewer than cfg.min_agents observations.
std::optional<double> crowd_order_parameter(std::span<const Observation> crowd, const MIConfig& cfg, const Rect& bounds);

/// Mean of each consecutive block of `window_steps` values; undefined entries
/// are skipped and an all-undefined block yields nullopt. A trailing partial
/// block is averaged over what it has.
std::vector<std::optional<double>> windowed_series(std::span<const std::optional<double>> per_step, int window_steps);

struct MetricsRecord {
  double t_s = 0.0;
  std::optional<double> mi_bits;
  std::optional<double> avg_force_N;
  int agents_remaining = 0;
  std::vector<int> exits_cumulative;

  bool operator==(const MetricsRecord&) const = default;
};

struct MetricsSeries {
  std::vector<std::string> exit_ids;
  std::vector<MetricsRecord> records;

  bool operator==(const MetricsSeries&) const = default;
};

/// Per-step quantities folded into a MetricsSeries.
struct StepMetrics {
  long step = 0;
  double t = 0.0;
  std::optional<double> mi_bits;
  std::optional<double> contact_force_sum;  // nullopt when unknown (trajectory-only analysis)
  int agents = 0;
  std::vector<int> exits_cumulative;
};

/// Folds per-step metrics into one record per window. Shared by the live
/// pipeline and offline analysis so both produce identical series.
class SeriesBuilder {
 public:
  SeriesBuilder(std::vector<std::string> exit_ids, int window_steps, double dt_s);

  void add(const StepMetrics& m);
  /// Flushes a trailing partial window and returns the series.
  MetricsSeries finish();

 private:
  void flush();

  MetricsSeries series_;
  int window_;
  double dt_;
  long windows_ = 0;
  std::vector<std::optional<double>> mi_;
  std::vector<std::optional<double>> force_;
  int last_agents_ = 0;
  std::vector<int> last_exits_;
};

struct AlarmInterval {
  double start_s = 0.0;
  double end_s = 0.0;
  bool operator==(const AlarmInterval&) const = default;
};

struct DetectorConfig {
  double mi_threshold_bits = 0.1;
  double sustain_s = 10.0;
  int min_agents = 10;
};

/// Maximal runs of records with mi_bits below threshold lasting at least
/// sustain_s. Gap records and records with fewer than min_agents agents break
/// a run. Each record stands for the second ending at its t_s.
std::vector<AlarmInterval> detect_crush(const MetricsSeries& series, const DetectorConfig& cfg = {});

// ---------------------------------------------------------------------------
// CSV formats

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

/// `t_s,mi_bits,avg_force_N,agents_remaining,<exit_id>...`, gaps left empty.
std::string series_to_csv(const MetricsSeries& s);
MetricsSeries series_from_csv(const std::string& text);

/// One frame of a trajectory dump.
struct TrajectoryFrame {
  double t = 0.0;
  std::vector<int> ids;
  std::vector<Observation> crowd;
};

/// Trajectory rows `t,id,x,y,theta`.
std::string trajectory_header();
void append_trajectory_rows(std::string& out, double t, std::span<const int> ids, std::span<const Observation> crowd);
std::vector<TrajectoryFrame> trajectory_from_csv(const std::string& text);

/// Step sidecar rows `step,t,contact_force_sum,agents,<exit_id>...`.
std::string step_metrics_header(std::span<const std::string> exit_ids);
void append_step_metrics_row(std::string& out, const StepMetrics& m);
std::vector<StepMetrics> step_metrics_from_csv(const std::string& text, std::vector<std::string>* exit_ids = nullptr);

/// Rebuilds the per-second series from a trajectory dump, optionally joined
/// with the step sidecar for force, population and exit columns.
MetricsSeries analyze_trajectory(std::span<const TrajectoryFrame> frames, std::span<const StepMetrics> steps,
                                 std::vector<std::string> exit_ids, const MIConfig& cfg, const Rect& bounds,
                                 double dt_s);

}  // namespace crushmi
