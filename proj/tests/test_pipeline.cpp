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

#include <doctest.h>

#include <fstream>
#include <numeric>
#include <sstream>

#include "crushmi/pipeline.hpp"

using namespace crushmi;

namespace {

Scenario small_room() {
  std::ifstream in(CRUSHMI_TEST_DATA_DIR "/small_room.json");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::vector<std::string> exit_ids(const Scenario& s) {
  std::vector<std::string> ids;
  for (const Exit& e : s.floorplan.exits) ids.push_back(e.id);
  return ids;
}

// One run shared by the cases below.
const RunResult& baseline() {
  static const RunResult r = run(small_room(), SfmParams{}, MIConfig{});
  return r;
}

}  // namespace

TEST_CASE("small room empties and the series has one record per second") {
  const RunResult& r = baseline();
  REQUIRE_FALSE(r.halt.has_value());
  REQUIRE(r.total_evac_time_s.has_value());
  CHECK(*r.total_evac_time_s > 5.0);
  CHECK(*r.total_evac_time_s < 60.0);
  CHECK(r.population == 40);
  for (std::size_t i = 0; i < r.series.records.size(); ++i) {
    CHECK(r.series.records[i].t_s == doctest::Approx(static_cast<double>(i + 1)));
  }
  CHECK(r.series.records.back().agents_remaining == 0);
}

TEST_CASE("persons are conserved at every recorded second") {
  const RunResult& r = baseline();
  for (const MetricsRecord& rec : r.series.records) {
    const int out = std::accumulate(rec.exits_cumulative.begin(), rec.exits_cumulative.end(), 0);
    CHECK(rec.agents_remaining + out == r.population);
  }
  const auto profile = r.leaving_profile();
  REQUIRE(profile.size() == 2);
  for (const auto& per_exit : profile) CHECK(std::is_sorted(per_exit.begin(), per_exit.end()));
}

TEST_CASE("the closed west door lets at most its knowers out, and only before it closes") {
  const RunResult& r = baseline();
  const auto profile = r.leaving_profile();
  CHECK(profile[1].back() <= 5);
  CHECK(profile[1].back() == profile[1][5]);  // nothing after t = 5 s
}

TEST_CASE("replay: identical inputs give byte-identical results") {
  const RunResult again = run(small_room(), SfmParams{}, MIConfig{});
  CHECK(run_result_to_json(again) == run_result_to_json(baseline()));
}

TEST_CASE("a different seed changes the run") {
  Scenario s = small_room();
  s.rng_seed = 8;
  CHECK(run_result_to_json(run(s, SfmParams{}, MIConfig{})) != run_result_to_json(baseline()));
}

TEST_CASE("result JSON round trips") {
  const std::string text = run_result_to_json(baseline());
  CHECK(run_result_to_json(run_result_from_json(text)) == text);
}

TEST_CASE("offline analysis of the dump equals the live series bit for bit") {
  const Scenario s = small_room();
  std::string traj, steps;
  RunOptions o;
  o.trajectory_csv = &traj;
  o.step_metrics_csv = &steps;
  const RunResult live = run(s, SfmParams{}, MIConfig{}, o);
  CHECK(run_result_to_json(live) == run_result_to_json(baseline()));  // dumping does not perturb the run

  std::vector<std::string> ids;
  const auto frames = trajectory_from_csv(traj);
  const auto step_rows = step_metrics_from_csv(steps, &ids);
  CHECK(ids == exit_ids(s));
  const MetricsSeries offline = analyze_trajectory(frames, step_rows, ids, MIConfig{}, s.floorplan.bounds, s.dt_s);
  CHECK(offline == live.series);

  // Without the sidecar, MI still matches; force is unknown.
  const MetricsSeries mi_only = analyze_trajectory(frames, {}, ids, MIConfig{}, s.floorplan.bounds, s.dt_s);
  REQUIRE(mi_only.records.size() >= 1);
  for (std::size_t i = 0; i < std::min(mi_only.records.size(), live.series.records.size()); ++i) {
    CHECK(mi_only.records[i].mi_bits == live.series.records[i].mi_bits);
  }
}

TEST_CASE("comparing a run with itself: all deltas zero") {
  const RunComparison c = compare_runs(baseline(), baseline(), 0.0, 60.0);
  REQUIRE_FALSE(c.deltas.empty());
  for (const SeriesDelta& d : c.deltas) {
    if (d.mi_delta) CHECK(*d.mi_delta == 0.0);
    if (d.force_delta) CHECK(*d.force_delta == 0.0);
  }
  CHECK_FALSE(c.a_more_ordered);
  CHECK_FALSE(c.b_higher_peak_force);
  CHECK(c.mean_mi_a == c.mean_mi_b);
}

TEST_CASE("window mean is over records inside the closed interval") {
  MetricsSeries s;
  for (int t = 1; t <= 10; ++t) s.records.push_back({static_cast<double>(t), static_cast<double>(t), 0.0, 50, {}});
  CHECK(*window_mean_mi(s, 3.0, 5.0) == doctest::Approx(4.0));
  CHECK_FALSE(window_mean_mi(s, 20.0, 30.0).has_value());
}

TEST_CASE("population 0: empty series, zero evacuation time") {
  Scenario s = small_room();
  s.spawn_regions.clear();
  s.population = 0;
  s.knowledge_rules.clear();
  const RunResult r = run(s, SfmParams{}, MIConfig{});
  CHECK(r.series.records.empty());
  REQUIRE(r.total_evac_time_s.has_value());
  CHECK(*r.total_evac_time_s == 0.0);
}

TEST_CASE("observer sees every step and a weakly falling head count") {
  long calls = 0;
  std::size_t last = 1000;
  bool monotone = true;
  RunOptions o;
  o.observer = [&](const SimFrame& f) {
    ++calls;
    monotone = monotone && f.agents.size() <= last;
    last = f.agents.size();
  };
  const RunResult r = run(small_room(), SfmParams{}, MIConfig{}, o);
  CHECK(monotone);
  CHECK(calls == static_cast<long>(std::llround(*r.total_evac_time_s / 0.01)));
}
