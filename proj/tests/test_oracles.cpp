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

// Sanity checks on the reference implementations themselves, against
// closed forms simple enough to do by hand.

#include <doctest.h>

#include <cmath>

#include "fixture_set.hpp"
#include "oracles.hpp"

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

TEST_CASE("oracle MI: 2x2 diagonal is one bit, flat table is zero") {
  CHECK(oracle::mi_from_counts({{5, 0}, {0, 5}}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::fabs(oracle::mi_from_counts({{3, 3}, {3, 3}})) < 1e-15);
  CHECK(std::isnan(oracle::mi_from_counts({{0, 0}, {0, 0}})));
}

TEST_CASE("oracle order parameter: all agents in one heading bin gives zero") {
  std::vector<std::array<double, 3>> xyt;
  for (int i = 0; i < 50; ++i) xyt.push_back({0.3 * i, 0.2 * i, 0.5});
  CHECK(std::fabs(oracle::order_parameter_triple_loop(xyt, 8, 8, 8, 0, 15, 0, 10)) < 1e-15);
}

TEST_CASE("oracle t: one and two degrees of freedom in closed form") {
  for (double t : {0.0, 0.5, 1.0, 3.0, 12.7}) {
    CHECK(oracle::t_two_tailed_closed_form(t, 1) == doctest::Approx(1.0 - 2.0 / kPi * std::atan(t)).epsilon(1e-14));
    CHECK(oracle::t_two_tailed_closed_form(t, 2) == doctest::Approx(1.0 - t / std::sqrt(2.0 + t * t)).epsilon(1e-14));
  }
  // df 3: p = 1 - (2/pi)(theta + sin cos)
  const double th = std::atan(2.0 / std::sqrt(3.0));
  CHECK(oracle::t_two_tailed_closed_form(2.0, 3) ==
        doctest::Approx(1.0 - 2.0 / kPi * (th + std::sin(th) * std::cos(th))).epsilon(1e-14));
}

TEST_CASE("oracle forces: contact at 1 cm overlap and free driving term") {
  const oracle::Constants c{2000, 0.08, 1.2e5, 2.4e5, 0.5, 3.0};
  const oracle::Body a{0, 0, 0, 0, 0.3, 80, 1.2, 1, 0};
  const oracle::Body b{0.59, 0, 0, 0, 0.3, 80, 1.2, 1, 0};
  const oracle::ForceOut f = oracle::pair_force(a, b, c);
  CHECK(f.contact == doctest::Approx(1200.0).epsilon(1e-9));
  CHECK(f.fx == doctest::Approx(-(2000.0 * std::exp(0.01 / 0.08) + 1200.0)).epsilon(1e-12));
  const auto alone = oracle::all_pairs_forces({a}, {}, c);
  CHECK(alone[0].fx == doctest::Approx(80.0 * 1.2 / 0.5));
  CHECK(alone[0].fy == 0.0);
}

TEST_CASE("oracle path: open room is a straight line") {
  const std::vector<oracle::Wall> walls{{0, 0, 10, 0}, {10, 0, 10, 4}, {10, 5, 10, 8}, {10, 8, 0, 8}, {0, 8, 0, 0}};
  const auto r = oracle::grid_visibility_path(2.0, 4.5, {10, 4, 10, 5}, walls, 0.25, 0, 10, 0, 8);
  // goal is sampled at 40 interior points, so the exact midpoint is missed by < 1/82 m
  CHECK(r.length >= 8.0);
  CHECK(r.length < 8.0 + 1e-4);
}

TEST_CASE("fixture set: empty input regenerates to empty output") {
  CHECK(oracle::regenerate({}).empty());
  CHECK(oracle::mismatches({}).empty());
}

TEST_CASE("fixture set: a tampered expectation is reported by id") {
  auto set = oracle::regenerate(oracle::initial_fixtures());
  CHECK(oracle::mismatches(set).empty());
  set[0]["expected"]["mi_bits"] = 0.5;
  const auto bad = oracle::mismatches(set);
  REQUIRE(bad.size() == 1);
  CHECK(bad[0] == set[0]["id"].get<std::string>());
}

TEST_CASE("fixture set: unknown oracle is an error") {
  oracle::Json fx = oracle::initial_fixtures()[0];
  fx["source"]["oracle"] = "nope";
  CHECK_THROWS_AS(oracle::regenerate_expected(fx), std::invalid_argument);
}
