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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = crushmi::cli::main(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kRoom = CRUSHMI_TEST_DATA_DIR "/small_room.json";

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::current_path() / ("cli_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("validate a bundled scenario: exit 0 and OK") {
  const Result r = call({"validate", "station_realistic"});
  CHECK(r.code == crushmi::cli::kOk);
  CHECK(r.out.find("OK") != std::string::npos);
}

TEST_CASE("validate a broken scenario: exit 1 naming the invariant") {
  const fs::path d = fresh_dir("bad");
  std::string text = slurp(kRoom);
  text.replace(text.find("\"population\": 40"), 16, "\"population\": 41");
  std::ofstream(d / "bad.json") << text;
  const Result r = call({"validate", (d / "bad.json").string()});
  CHECK(r.code == crushmi::cli::kValidationFailure);
  CHECK(r.err.find("population") != std::string::npos);
  CHECK(call({"validate", (d / "missing.json").string()}).code == crushmi::cli::kValidationFailure);
}

TEST_CASE("run writes the series CSV and result JSON; the same argv reproduces them") {
  const fs::path d = fresh_dir("run");
  const Result r = call({"run", kRoom, "--seed", "3", "-o", d.string()});
  REQUIRE(r.code == crushmi::cli::kOk);
  const fs::path series = d / "small_room_seed3.series.csv";
  const fs::path result = d / "small_room_seed3.result.json";
  CHECK(fs::exists(series));
  CHECK(fs::exists(result));
  CHECK(slurp(series).rfind("t_s,mi_bits,avg_force_N,agents_remaining,east,west", 0) == 0);
  const std::string first = slurp(result);
  REQUIRE(call({"run", kRoom, "--seed", "3", "-o", d.string()}).code == crushmi::cli::kOk);
  CHECK(slurp(result) == first);
}

TEST_CASE("dump, analyze and compare") {
  const fs::path d = fresh_dir("dump");
  REQUIRE(call({"run", kRoom, "--dump-trajectory", "-o", d.string()}).code == crushmi::cli::kOk);
  const fs::path traj = d / "small_room_seed7.trajectory.csv";
  const fs::path steps = d / "small_room_seed7.steps.csv";
  REQUIRE(fs::exists(traj));
  REQUIRE(fs::exists(steps));
  const Result a = call({"analyze", traj.string(), "--scenario", kRoom, "--step-metrics", steps.string()});
  CHECK(a.code == crushmi::cli::kOk);
  CHECK(a.out == slurp(d / "small_room_seed7.series.csv"));

  const std::string res = (d / "small_room_seed7.result.json").string();
  const Result c = call({"compare", res, res, "--from", "0", "--to", "30"});
  CHECK(c.code == crushmi::cli::kOk);
  CHECK(c.out.find("\"a_more_ordered\": false") != std::string::npos);
}

TEST_CASE("sweep and correlate") {
  const fs::path d = fresh_dir("sweep");
  const Result s = call({"sweep", kRoom, "--seed-range", "1:2", "--threads", "2", "-o", d.string()});
  REQUIRE(s.code == crushmi::cli::kOk);
  const std::string a = (d / "small_room_seed1.series.csv").string();
  const std::string b = (d / "small_room_seed2.series.csv").string();
  const Result c = call({"correlate", a, b, "-o", d.string()});
  CHECK(c.code == crushmi::cli::kOk);
  CHECK(c.out.find("pooled r=") != std::string::npos);
  CHECK(c.out.find(" p=") != std::string::npos);
  CHECK(c.out.find(" n=") != std::string::npos);
  CHECK(fs::exists(d / "scatter.csv"));
  CHECK(fs::exists(d / "correlation.json"));
}

TEST_CASE("usage errors exit 1") {
  CHECK(call({"sweep", kRoom, "--seeds", "1,2", "--seed-range", "1:3"}).code == crushmi::cli::kValidationFailure);
  CHECK(call({"frobnicate"}).code == crushmi::cli::kValidationFailure);
  CHECK(call({"run", kRoom, "--bins-x", "1"}).code == crushmi::cli::kValidationFailure);
  CHECK(call({"run", kRoom, "--params", "/nonexistent/params.json"}).code == crushmi::cli::kValidationFailure);
}
