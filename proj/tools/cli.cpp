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

#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "crushmi/analysis.hpp"
#include "crushmi/pipeline.hpp"
#include "crushmi/scenario.hpp"
#include "crushmi/stats.hpp"

namespace crushmi::cli {

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string params_path;
  int bins_x = 8;
  int bins_y = 8;
  int bins_theta = 8;
  double mi_threshold = 0.1;
  double sustain = 10.0;
  std::string out_dir = ".";
};

void add_mi_flags(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--bins-x", o.bins_x, "Spatial bins along x")->check(CLI::Range(2, 1 << 16));
  cmd->add_option("--bins-y", o.bins_y, "Spatial bins along y")->check(CLI::Range(2, 1 << 16));
  cmd->add_option("--bins-theta", o.bins_theta, "Heading bins over [-pi, pi)")->check(CLI::Range(2, 1 << 16));
}

void add_detector_flags(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--mi-threshold", o.mi_threshold, "Crush alarm threshold, bits")->check(CLI::PositiveNumber);
  cmd->add_option("--sustain", o.sustain, "Minimum alarm duration, seconds")->check(CLI::PositiveNumber);
}

MIConfig mi_config(const CommonOptions& o, const Scenario& s) {
  MIConfig cfg;
  cfg.x_bins = o.bins_x;
  cfg.y_bins = o.bins_y;
  cfg.theta_bins = o.bins_theta;
  cfg.window_steps = s.steps_per_second();
  return cfg;
}

DetectorConfig detector_config(const CommonOptions& o) {
  DetectorConfig d;
  d.mi_threshold_bits = o.mi_threshold;
  d.sustain_s = o.sustain;
  return d;
}

SfmParams params_from(const CommonOptions& o) {
  if (o.params_path.empty()) {
    const fs::path bundled = fs::path(CRUSHMI_DATA_DIR) / "params" / "sfm_default.json";
    return fs::exists(bundled) ? load_params(bundled) : SfmParams{};
  }
  const fs::path p(o.params_path);
  if (fs::exists(p)) return load_params(p);
  return load_params(fs::path(CRUSHMI_DATA_DIR) / "params" / (o.params_path + ".json"));
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ParseError(p.string() + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error(p.string() + ": cannot write file");
  out << text;
  if (!out) throw std::runtime_error(p.string() + ": write failed");
}

std::string stem_for(const Scenario& s) { return s.id + "_seed" + std::to_string(s.rng_seed); }

struct RunFiles {
  fs::path series;
  fs::path result;
};

RunFiles write_run(const fs::path& dir, const Scenario& s, const RunResult& r) {
  RunFiles f{dir / (stem_for(s) + ".series.csv"), dir / (stem_for(s) + ".result.json")};
  write_file(f.series, series_to_csv(r.series));
  write_file(f.result, run_result_to_json(r));
  return f;
}

std::string summary_line(const RunResult& r) {
  std::ostringstream os;
  os << r.scenario_id << " seed=" << r.seed << " evac_time_s="
     << (r.total_evac_time_s ? format_double(*r.total_evac_time_s) : std::string("incomplete"))
     << " peak_force_N=" << format_double(r.peak_force_N) << "@" << format_double(r.peak_force_t_s)
     << "s alarms=" << r.alarms.size();
  for (const AlarmInterval& a : r.alarms) os << " [" << format_double(a.start_s) << "," << format_double(a.end_s) << "]";
  if (r.halt) os << " halt=\"" << *r.halt << "\"";
  return os.str();
}

int cmd_validate(const std::vector<std::string>& scenarios, std::ostream& out, std::ostream& err) {
  int code = kOk;
  for (const std::string& name : scenarios) {
    try {
      const Scenario s = load_scenario(resolve_scenario_path(name));
      out << name << ": OK\n";
    } catch (const ValidationError& e) {
      err << name << ": " << e.what() << "\n";
      code = kValidationFailure;
    } catch (const ParseError& e) {
      err << name << ": " << e.what() << "\n";
      code = kValidationFailure;
    }
  }
  return code;
}

int cmd_run(const std::string& scenario_name, std::optional<std::uint64_t> seed, bool dump, const CommonOptions& o,
            std::ostream& out, std::ostream& err) {
  Scenario s = load_scenario(resolve_scenario_path(scenario_name));
  if (seed) s.rng_seed = *seed;
  const SfmParams params = params_from(o);
  RunOptions ro;
  ro.detector = detector_config(o);
  std::string traj, steps;
  if (dump) {
    ro.trajectory_csv = &traj;
    ro.step_metrics_csv = &steps;
  }
  const RunResult r = run(s, params, mi_config(o, s), ro);
  const fs::path dir(o.out_dir);
  const RunFiles files = write_run(dir, s, r);
  if (dump) {
    write_file(dir / (stem_for(s) + ".trajectory.csv"), traj);
    write_file(dir / (stem_for(s) + ".steps.csv"), steps);
  }
  out << summary_line(r) << "\n";
  out << "series: " << files.series.string() << "\nresult: " << files.result.string() << "\n";
  if (r.halt) {
    err << "run halted: " << *r.halt << "\n";
    return kRuntimeHalt;
  }
  return kOk;
}

int cmd_analyze(const std::string& trajectory, const std::string& scenario_name, const std::string& steps_path,
                const std::string& out_file, const CommonOptions& o, std::ostream& out) {
  const Scenario s = load_scenario(resolve_scenario_path(scenario_name));
  const auto frames = trajectory_from_csv(read_file(trajectory));
  std::vector<StepMetrics> steps;
  std::vector<std::string> exit_ids;
  if (!steps_path.empty()) steps = step_metrics_from_csv(read_file(steps_path), &exit_ids);
  const MetricsSeries series =
      analyze_trajectory(frames, steps, exit_ids, mi_config(o, s), s.floorplan.bounds, s.dt_s);
  const std::string csv = series_to_csv(series);
  if (out_file.empty()) out << csv;
  else write_file(out_file, csv);
  return kOk;
}

int cmd_correlate(const std::vector<std::string>& inputs, double alpha, const std::string& out_dir, std::ostream& out,
                  std::ostream& err) {
  std::vector<MetricsSeries> series;
  for (const std::string& p : inputs) series.push_back(series_from_csv(read_file(p)));
  const Correlation pooled = correlate_series(series, alpha);
  out << "pooled r=" << format_double(pooled.report.r_p) << " p=" << format_double(pooled.report.p_value)
      << " n=" << pooled.report.n << " alpha=" << format_double(alpha)
      << (pooled.report.significant() ? " significant" : " not-significant") << "\n";
  std::ostringstream report;
  report << "{\n  \"pooled\": {\"r\": " << format_double(pooled.report.r_p)
         << ", \"p\": " << format_double(pooled.report.p_value) << ", \"n\": " << pooled.report.n << "},\n  \"runs\": [";
  for (std::size_t i = 0; i < series.size(); ++i) {
    report << (i ? ", " : "") << "{\"input\": \"" << inputs[i] << "\"";
    try {
      const Correlation one = correlate_series(std::span<const MetricsSeries>(&series[i], 1), alpha);
      out << inputs[i] << " r=" << format_double(one.report.r_p) << " p=" << format_double(one.report.p_value)
          << " n=" << one.report.n << "\n";
      report << ", \"r\": " << format_double(one.report.r_p) << ", \"p\": " << format_double(one.report.p_value)
             << ", \"n\": " << one.report.n;
    } catch (const UndefinedCorrelation& e) {
      err << inputs[i] << ": " << e.what() << "\n";
    }
    report << "}";
  }
  report << "]\n}\n";
  write_file(fs::path(out_dir) / "scatter.csv", scatter_to_csv(pooled.scatter));
  write_file(fs::path(out_dir) / "correlation.json", report.str());
  return kOk;
}

int cmd_compare(const std::string& a, const std::string& b, double from, double to, std::ostream& out) {
  const RunResult ra = run_result_from_json(read_file(a));
  const RunResult rb = run_result_from_json(read_file(b));
  out << comparison_to_json(compare_runs(ra, rb, from, to));
  return kOk;
}

std::vector<std::uint64_t> parse_seed_range(const std::string& range) {
  const auto colon = range.find(':');
  if (colon == std::string::npos) throw CLI::ValidationError("--seed-range", "expected FIRST:LAST");
  const std::uint64_t lo = std::stoull(range.substr(0, colon));
  const std::uint64_t hi = std::stoull(range.substr(colon + 1));
  if (hi < lo) throw CLI::ValidationError("--seed-range", "LAST must be >= FIRST");
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  return seeds;
}

int cmd_sweep(const std::string& scenario_name, std::vector<std::uint64_t> seeds, unsigned threads,
              const CommonOptions& o, std::ostream& out, std::ostream& err) {
  const Scenario base = load_scenario(resolve_scenario_path(scenario_name));
  const SfmParams params = params_from(o);
  std::vector<std::optional<RunResult>> results(seeds.size());
  std::atomic<std::size_t> next{0};
  std::mutex io;
  const auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      Scenario s = base;
      s.rng_seed = seeds[i];
      RunOptions ro;
      ro.detector = detector_config(o);
      RunResult r = run(s, params, mi_config(o, s), ro);
      {
        const std::lock_guard lock(io);
        write_run(o.out_dir, s, r);
      }
      results[i] = std::move(r);
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(seeds.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = kOk;
  for (const auto& r : results) {
    out << summary_line(*r) << "\n";
    if (r->halt) {
      err << "seed " << r->seed << " halted: " << *r->halt << "\n";
      code = kRuntimeHalt;
    }
  }
  return code;
}

}  // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"crushmi: crowd evacuation simulation and mutual-information crush detection"};
  app.require_subcommand(1);
  CommonOptions o;

  std::vector<std::string> validate_targets;
  auto* validate = app.add_subcommand("validate", "Check scenario files against their invariants");
  validate->add_option("scenario", validate_targets, "Scenario file or bundled name")->required();

  std::string run_scenario;
  std::optional<std::uint64_t> run_seed;
  bool dump = false;
  auto* run_cmd = app.add_subcommand("run", "Simulate one scenario and write its series and result");
  run_cmd->add_option("scenario", run_scenario, "Scenario file or bundled name")->required();
  run_cmd->add_option("--seed", run_seed, "RNG seed (overrides the scenario's rng_seed)");
  run_cmd->add_option("--params", o.params_path, "SFM params file or bundled name");
  run_cmd->add_flag("--dump-trajectory", dump, "Also write t,id,x,y,theta rows and the step sidecar");
  run_cmd->add_option("-o,--out", o.out_dir, "Output directory");
  add_mi_flags(run_cmd, o);
  add_detector_flags(run_cmd, o);

  std::string traj_path, analyze_scenario, steps_path, analyze_out;
  auto* analyze = app.add_subcommand("analyze", "Rebuild the per-second series from a trajectory dump");
  analyze->add_option("trajectory", traj_path, "Trajectory CSV (t,id,x,y,theta)")->required()->check(CLI::ExistingFile);
  analyze->add_option("--scenario", analyze_scenario, "Scenario providing bounds and dt")->required();
  analyze->add_option("--step-metrics", steps_path, "Step sidecar written next to the trajectory")->check(CLI::ExistingFile);
  analyze->add_option("-o,--out", analyze_out, "Output CSV file (default: stdout)");
  add_mi_flags(analyze, o);

  std::vector<std::string> corr_inputs;
  double alpha = 0.01;
  auto* correlate = app.add_subcommand("correlate", "Force/MI correlation over one or more series CSVs");
  correlate->add_option("series", corr_inputs, "Series CSV files")->required()->check(CLI::ExistingFile);
  correlate->add_option("--alpha", alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
  correlate->add_option("-o,--out", o.out_dir, "Directory for scatter.csv and correlation.json");

  std::string cmp_a, cmp_b;
  double from = 40.0, to = 110.0;
  auto* compare = app.add_subcommand("compare", "Compare two run results");
  compare->add_option("a", cmp_a, "First result JSON (baseline)")->required()->check(CLI::ExistingFile);
  compare->add_option("b", cmp_b, "Second result JSON")->required()->check(CLI::ExistingFile);
  compare->add_option("--from", from, "Window start, seconds");
  compare->add_option("--to", to, "Window end, seconds");

  std::string sweep_scenario, seed_range;
  std::vector<std::uint64_t> seed_list;
  unsigned threads = 0;
  auto* sweep = app.add_subcommand("sweep", "Run one scenario over many seeds in parallel");
  sweep->add_option("scenario", sweep_scenario, "Scenario file or bundled name")->required();
  auto* seeds_opt = sweep->add_option("--seeds", seed_list, "Comma-separated seeds")->delimiter(',');
  auto* range_opt = sweep->add_option("--seed-range", seed_range, "Inclusive range FIRST:LAST");
  seeds_opt->excludes(range_opt);
  sweep->add_option("--threads", threads, "Worker threads (0: one per core)");
  sweep->add_option("--params", o.params_path, "SFM params file or bundled name");
  sweep->add_option("-o,--out", o.out_dir, "Output directory");
  add_mi_flags(sweep, o);
  add_detector_flags(sweep, o);

  std::vector<std::string> argv_store = args;
  std::reverse(argv_store.begin(), argv_store.end());
  try {
    app.parse(argv_store);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kValidationFailure;
  }

  try {
    if (*validate) return cmd_validate(validate_targets, out, err);
    if (*run_cmd) return cmd_run(run_scenario, run_seed, dump, o, out, err);
    if (*analyze) return cmd_analyze(traj_path, analyze_scenario, steps_path, analyze_out, o, out);
    if (*correlate) return cmd_correlate(corr_inputs, alpha, o.out_dir, out, err);
    if (*compare) return cmd_compare(cmp_a, cmp_b, from, to, out);
    if (*sweep) {
      if (seed_list.empty() && seed_range.empty()) {
        err << "sweep: one of --seeds or --seed-range is required\n";
        return kValidationFailure;
      }
      return cmd_sweep(sweep_scenario, seed_range.empty() ? seed_list : parse_seed_range(seed_range), threads, o, out, err);
    }
  } catch (const ValidationError& e) {
    err << e.what() << "\n";
    return kValidationFailure;
  } catch (const ParseError& e) {
    err << e.what() << "\n";
    return kValidationFailure;
  } catch (const CLI::Error& e) {
    err << e.what() << "\n";
    return kValidationFailure;
  } catch (const UndefinedCorrelation& e) {
    err << "correlate: " << e.what() << "\n";
    return kRuntimeHalt;
  } catch (const SimulationHalt& e) {
    err << e.what() << "\n";
    return kRuntimeHalt;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeHalt;
  }
  return kOk;
}

}  // namespace crushmi::cli
