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

#include "crushmi/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "crushmi/errors.hpp"

namespace crushmi {

// ---------------------------------------------------------------------------
// Histogram and information measures

JointHistogram::JointHistogram(int a_bins, int b_bins)
    : a_bins_(a_bins), b_bins_(b_bins), joint_(static_cast<std::size_t>(a_bins) * static_cast<std::size_t>(b_bins), 0) {
  if (a_bins < 1 || b_bins < 1) throw std::invalid_argument("JointHistogram: bin counts must be >= 1");
}

void JointHistogram::add(int a, int b, std::int64_t count) {
  if (a < 0 || a >= a_bins_ || b < 0 || b >= b_bins_) throw std::out_of_range("JointHistogram::add: bin out of range");
  if (count < 0) throw std::invalid_argument("JointHistogram::add: negative count");
  joint_[index(a, b)] += count;
  n_ += count;
}

std::vector<std::int64_t> JointHistogram::a_marginal() const {
  std::vector<std::int64_t> m(static_cast<std::size_t>(a_bins_), 0);
  for (int a = 0; a < a_bins_; ++a)
    for (int b = 0; b < b_bins_; ++b) m[static_cast<std::size_t>(a)] += at(a, b);
  return m;
}

std::vector<std::int64_t> JointHistogram::b_marginal() const {
  std::vector<std::int64_t> m(static_cast<std::size_t>(b_bins_), 0);
  for (int a = 0; a < a_bins_; ++a)
    for (int b = 0; b < b_bins_; ++b) m[static_cast<std::size_t>(b)] += at(a, b);
  return m;
}

JointHistogram JointHistogram::transposed() const {
  JointHistogram t(b_bins_, a_bins_);
  for (int a = 0; a < a_bins_; ++a)
    for (int b = 0; b < b_bins_; ++b)
      if (at(a, b) > 0) t.add(b, a, at(a, b));
  return t;
}

namespace {

// Sums after sorting, so any permutation of the same terms (transposes,
// relabelled bins) gives the bitwise-same total.
double ordered_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (const double t : terms) s += t;
  return s;
}

std::optional<double> marginal_entropy(const std::vector<std::int64_t>& m, std::int64_t n) {
  if (n == 0) return std::nullopt;
  std::vector<double> terms;
  const double nn = static_cast<double>(n);
  for (const std::int64_t c : m) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / nn;
    terms.push_back(-p * std::log2(p));
  }
  return std::max(0.0, ordered_sum(terms));
}

}  // namespace

std::optional<double> mutual_information(const JointHistogram& h, double log_base) {
  if (h.n() == 0) return std::nullopt;
  const std::vector<std::int64_t> ra = h.a_marginal();
  const std::vector<std::int64_t> rb = h.b_marginal();
  const double n = static_cast<double>(h.n());
  const double scale = 1.0 / std::log2(log_base);
  std::vector<double> terms;
  for (int a = 0; a < h.a_bins(); ++a) {
    for (int b = 0; b < h.b_bins(); ++b) {
      const std::int64_t c = h.at(a, b);
      if (c == 0) continue;
      const double cd = static_cast<double>(c);
      const double ratio = (cd * n) / (static_cast<double>(ra[static_cast<std::size_t>(a)]) *
                                       static_cast<double>(rb[static_cast<std::size_t>(b)]));
      terms.push_back((cd / n) * std::log2(ratio));
    }
  }
  return std::max(0.0, ordered_sum(terms) * scale);
}

std::optional<double> entropy_a(const JointHistogram& h) { return marginal_entropy(h.a_marginal(), h.n()); }
std::optional<double> entropy_b(const JointHistogram& h) { return marginal_entropy(h.b_marginal(), h.n()); }

std::vector<std::string> MIConfig::problems() const {
  std::vector<std::string> out;
  if (x_bins < 2) out.push_back("x_bins must be >= 2");
  if (y_bins < 2) out.push_back("y_bins must be >= 2");
  if (theta_bins < 2) out.push_back("theta_bins must be >= 2");
  if (window_steps < 1) out.push_back("window_steps must be >= 1");
  if (min_agents < 1) out.push_back("min_agents must be >= 1");
  return out;
}

int bin_of(double v, double lo, double hi, int bins) {
  const double u = (v - lo) / (hi - lo) * bins;
  if (!(u >= 0.0)) return 0;
  const auto b = static_cast<long>(std::floor(u));
  return static_cast<int>(std::min<long>(b, bins - 1));
}

std::optional<double> crowd_order_parameter(std::span<const Observation> crowd, const MIConfig& cfg, const Rect& bounds) {
  if (crowd.size() < static_cast<std::size_t>(std::max(1, cfg.min_agents))) return std::nullopt;
  constexpr double pi = std::numbers::pi;
  JointHistogram xt(cfg.x_bins, cfg.theta_bins);
  JointHistogram yt(cfg.y_bins, cfg.theta_bins);
  for (const Observation& o : crowd) {
    const int tb = bin_of(o.theta, -pi, pi, cfg.theta_bins);
    xt.add(bin_of(o.x, bounds.min.x, bounds.max.x, cfg.x_bins), tb);
    yt.add(bin_of(o.y, bounds.min.y, bounds.max.y, cfg.y_bins), tb);
  }
  return (*mutual_information(xt) + *mutual_information(yt)) / 2.0;
}

std::vector<std::optional<double>> windowed_series(std::span<const std::optional<double>> per_step, int window_steps) {
  if (window_steps < 1) throw std::invalid_argument("windowed_series: window_steps must be >= 1");
  std::vector<std::optional<double>> out;
  const auto w = static_cast<std::size_t>(window_steps);
  for (std::size_t start = 0; start < per_step.size(); start += w) {
    double sum = 0.0;
    int count = 0;
    for (std::size_t k = start; k < std::min(per_step.size(), start + w); ++k) {
      if (per_step[k]) {
        sum += *per_step[k];
        ++count;
      }
    }
    out.push_back(count > 0 ? std::optional<double>(sum / count) : std::nullopt);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Series

SeriesBuilder::SeriesBuilder(std::vector<std::string> exit_ids, int window_steps, double dt_s)
    : window_(window_steps), dt_(dt_s), last_exits_(exit_ids.size(), 0) {
  series_.exit_ids = std::move(exit_ids);
  if (window_ < 1) throw std::invalid_argument("SeriesBuilder: window_steps must be >= 1");
}

void SeriesBuilder::add(const StepMetrics& m) {
  mi_.push_back(m.mi_bits);
  if (m.contact_force_sum) {
    force_.push_back(m.agents > 0 ? *m.contact_force_sum / static_cast<double>(m.agents) : 0.0);
  } else {
    force_.push_back(std::nullopt);
  }
  last_agents_ = m.agents;
  if (m.exits_cumulative.size() == last_exits_.size()) last_exits_ = m.exits_cumulative;
  if (static_cast<int>(mi_.size()) == window_) flush();
}

void SeriesBuilder::flush() {
  if (mi_.empty()) return;
  MetricsRecord r;
  r.t_s = static_cast<double>((windows_ + 1) * window_) * dt_;
  r.mi_bits = windowed_series(mi_, window_).front();
  r.avg_force_N = windowed_series(force_, window_).front();
  r.agents_remaining = last_agents_;
  r.exits_cumulative = last_exits_;
  series_.records.push_back(std::move(r));
  ++windows_;
  mi_.clear();
  force_.clear();
}

MetricsSeries SeriesBuilder::finish() {
  flush();
  return std::move(series_);
}

std::vector<AlarmInterval> detect_crush(const MetricsSeries& series, const DetectorConfig& cfg) {
  std::vector<AlarmInterval> out;
  const auto& recs = series.records;
  std::size_t i = 0;
  while (i < recs.size()) {
    const auto low = [&](std::size_t k) {
      return recs[k].mi_bits && *recs[k].mi_bits < cfg.mi_threshold_bits && recs[k].agents_remaining >= cfg.min_agents;
    };
    if (!low(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < recs.size() && low(j + 1)) ++j;
    const double spacing = i > 0 ? recs[i].t_s - recs[i - 1].t_s : (recs.size() > 1 ? recs[1].t_s - recs[0].t_s : recs[i].t_s);
    const AlarmInterval iv{recs[i].t_s - spacing, recs[j].t_s};
    if (iv.end_s - iv.start_s >= cfg.sustain_s - 1e-9) out.push_back(iv);
    i = j + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ParseError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

std::vector<std::string_view> lines_of(const std::string& text) {
  std::vector<std::string_view> lines;
  std::string_view rest(text);
  while (!rest.empty()) {
    const std::size_t nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    if (nl == std::string_view::npos) break;
    rest.remove_prefix(nl + 1);
  }
  return lines;
}

int parse_int(std::string_view text, const std::string& ctx) {
  int v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ParseError(ctx + ": not an integer: '" + std::string(text) + "'");
  }
  return v;
}

double parse_cell(std::string_view text, const std::string& ctx) {
  try {
    return parse_double(text);
  } catch (const ParseError& e) {
    throw ParseError(ctx + ": " + e.what());
  }
}

std::string line_ctx(std::size_t i) { return "line " + std::to_string(i + 1); }

}  // namespace

std::string series_to_csv(const MetricsSeries& s) {
  std::string out = "t_s,mi_bits,avg_force_N,agents_remaining";
  for (const auto& id : s.exit_ids) out += "," + id;
  out += "\n";
  for (const MetricsRecord& r : s.records) {
    out += format_double(r.t_s);
    out += ",";
    if (r.mi_bits) out += format_double(*r.mi_bits);
    out += ",";
    if (r.avg_force_N) out += format_double(*r.avg_force_N);
    out += "," + std::to_string(r.agents_remaining);
    for (const int c : r.exits_cumulative) out += "," + std::to_string(c);
    out += "\n";
  }
  return out;
}

MetricsSeries series_from_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ParseError("series CSV: empty input");
  const auto header = split(lines[0]);
  if (header.size() < 4 || header[0] != "t_s" || header[1] != "mi_bits" || header[2] != "avg_force_N" ||
      header[3] != "agents_remaining") {
    throw ParseError("series CSV: line 1: expected header t_s,mi_bits,avg_force_N,agents_remaining,...");
  }
  MetricsSeries s;
  for (std::size_t k = 4; k < header.size(); ++k) s.exit_ids.emplace_back(header[k]);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i]);
    if (cells.size() != header.size()) throw ParseError("series CSV: " + line_ctx(i) + ": wrong number of cells");
    MetricsRecord r;
    r.t_s = parse_cell(cells[0], line_ctx(i));
    if (!cells[1].empty()) r.mi_bits = parse_cell(cells[1], line_ctx(i));
    if (!cells[2].empty()) r.avg_force_N = parse_cell(cells[2], line_ctx(i));
    r.agents_remaining = parse_int(cells[3], line_ctx(i));
    for (std::size_t k = 4; k < cells.size(); ++k) r.exits_cumulative.push_back(parse_int(cells[k], line_ctx(i)));
    s.records.push_back(std::move(r));
  }
  return s;
}

std::string trajectory_header() { return "t,id,x,y,theta\n"; }

void append_trajectory_rows(std::string& out, double t, std::span<const int> ids, std::span<const Observation> crowd) {
  const std::string ts = format_double(t);
  for (std::size_t i = 0; i < crowd.size(); ++i) {
    out += ts;
    out += ',';
    out += std::to_string(ids[i]);
    out += ',';
    out += format_double(crowd[i].x);
    out += ',';
    out += format_double(crowd[i].y);
    out += ',';
    out += format_double(crowd[i].theta);
    out += '\n';
  }
}

std::vector<TrajectoryFrame> trajectory_from_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != "t,id,x,y,theta") throw ParseError("trajectory CSV: line 1: expected header t,id,x,y,theta");
  std::vector<TrajectoryFrame> frames;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i]);
    if (cells.size() != 5) throw ParseError("trajectory CSV: " + line_ctx(i) + ": expected 5 cells");
    const double t = parse_cell(cells[0], line_ctx(i));
    if (frames.empty() || frames.back().t != t) {
      if (!frames.empty() && t < frames.back().t) throw ParseError("trajectory CSV: " + line_ctx(i) + ": time goes backwards");
      frames.push_back({t, {}, {}});
    }
    frames.back().ids.push_back(parse_int(cells[1], line_ctx(i)));
    frames.back().crowd.push_back({parse_cell(cells[2], line_ctx(i)), parse_cell(cells[3], line_ctx(i)),
                                   parse_cell(cells[4], line_ctx(i))});
  }
  return frames;
}

std::string step_metrics_header(std::span<const std::string> exit_ids) {
  std::string out = "step,t,contact_force_sum,agents";
  for (const auto& id : exit_ids) out += "," + id;
  return out + "\n";
}

void append_step_metrics_row(std::string& out, const StepMetrics& m) {
  out += std::to_string(m.step);
  out += ',';
  out += format_double(m.t);
  out += ',';
  if (m.contact_force_sum) out += format_double(*m.contact_force_sum);
  out += ',';
  out += std::to_string(m.agents);
  for (const int c : m.exits_cumulative) {
    out += ',';
    out += std::to_string(c);
  }
  out += '\n';
}

std::vector<StepMetrics> step_metrics_from_csv(const std::string& text, std::vector<std::string>* exit_ids) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ParseError("step metrics CSV: empty input");
  const auto header = split(lines[0]);
  if (header.size() < 4 || header[0] != "step" || header[1] != "t" || header[2] != "contact_force_sum" || header[3] != "agents") {
    throw ParseError("step metrics CSV: line 1: expected header step,t,contact_force_sum,agents,...");
  }
  if (exit_ids) {
    exit_ids->clear();
    for (std::size_t k = 4; k < header.size(); ++k) exit_ids->emplace_back(header[k]);
  }
  std::vector<StepMetrics> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i]);
    if (cells.size() != header.size()) throw ParseError("step metrics CSV: " + line_ctx(i) + ": wrong number of cells");
    StepMetrics m;
    m.step = parse_int(cells[0], line_ctx(i));
    m.t = parse_cell(cells[1], line_ctx(i));
    if (!cells[2].empty()) m.contact_force_sum = parse_cell(cells[2], line_ctx(i));
    m.agents = parse_int(cells[3], line_ctx(i));
    for (std::size_t k = 4; k < cells.size(); ++k) m.exits_cumulative.push_back(parse_int(cells[k], line_ctx(i)));
    out.push_back(std::move(m));
  }
  return out;
}

MetricsSeries analyze_trajectory(std::span<const TrajectoryFrame> frames, std::span<const StepMetrics> steps,
                                 std::vector<std::string> exit_ids, const MIConfig& cfg, const Rect& bounds,
                                 double dt_s) {
  SeriesBuilder builder(steps.empty() ? std::vector<std::string>{} : std::move(exit_ids), cfg.window_steps, dt_s);
  if (steps.empty()) {
    for (const TrajectoryFrame& f : frames) {
      StepMetrics m;
      m.step = std::lround(f.t / dt_s);
      m.t = f.t;
      m.mi_bits = crowd_order_parameter(f.crowd, cfg, bounds);
      m.agents = static_cast<int>(f.crowd.size());
      builder.add(m);
    }
    return builder.finish();
  }
  std::map<double, const TrajectoryFrame*> by_time;
  for (const TrajectoryFrame& f : frames) by_time[f.t] = &f;
  for (StepMetrics m : steps) {
    const auto it = by_time.find(m.t);
    const std::span<const Observation> crowd =
        it == by_time.end() ? std::span<const Observation>{} : std::span<const Observation>(it->second->crowd);
    if (static_cast<int>(crowd.size()) != m.agents) {
      throw ParseError("trajectory and step metrics disagree on the population at t=" + format_double(m.t));
    }
    m.mi_bits = crowd_order_parameter(crowd, cfg, bounds);
    builder.add(m);
  }
  return builder.finish();
}

}  // namespace crushmi
