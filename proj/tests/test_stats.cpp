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

#include <cmath>
#include <cstdio>
#include <string>

#include "crushmi/stats.hpp"
#include "fixture_set.hpp"
#include "oracles.hpp"

using namespace crushmi;

namespace {

// Same value when both are rounded to 4 significant figures.
bool sig4(double a, double b) {
  char x[32], y[32];
  std::snprintf(x, sizeof x, "%.3e", a);
  std::snprintf(y, sizeof y, "%.3e", b);
  return std::string(x) == y;
}

MetricsSeries series_of(const std::vector<double>& force, const std::vector<double>& mi) {
  MetricsSeries s;
  for (std::size_t i = 0; i < force.size(); ++i) {
    s.records.push_back({static_cast<double>(i + 1), mi[i], force[i], 100, {}});
  }
  return s;
}

}  // namespace

TEST_CASE("perfect linear relations") {
  const std::vector<double> x{1, 2, 3, 4, 5, 6};
  std::vector<double> y, z;
  for (double v : x) {
    y.push_back(2 * v + 3);
    z.push_back(-v);
  }
  CHECK(pearson_r(x, y) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(pearson_r(x, z) == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("hand-computed r = 0.8") {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{1, 3, 2, 4};
  CHECK(pearson_r(x, y) == doctest::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("r is symmetric and invariant under positive affine maps") {
  oracle::Stream s(41);
  std::vector<double> x, y, xa, yn;
  for (int i = 0; i < 200; ++i) {
    x.push_back(s.range(0, 10));
    y.push_back(x.back() * 0.3 + s.range(-2, 2));
    xa.push_back(5.0 * x.back() - 7.0);
    yn.push_back(-y.back());
  }
  const double r = pearson_r(x, y);
  CHECK(pearson_r(y, x) == doctest::Approx(r).epsilon(1e-13));
  CHECK(pearson_r(xa, y) == doctest::Approx(r).epsilon(1e-12));
  CHECK(pearson_r(x, yn) == doctest::Approx(-r).epsilon(1e-13));
}

TEST_CASE("constant or too short series: undefined correlation") {
  CHECK_THROWS_AS(pearson_r(std::vector<double>{1, 1, 1, 1}, std::vector<double>{1, 2, 3, 4}), UndefinedCorrelation);
  CHECK_THROWS_AS(pearson_r(std::vector<double>{1, 2}, std::vector<double>{1, 2}), UndefinedCorrelation);
  CHECK_THROWS_AS(pearson_r(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}), UndefinedCorrelation);
}

TEST_CASE("p-values: r = 0 gives 1, |r| = 1 gives an exact 0") {
  for (long n : {3L, 10L, 1000L}) CHECK(p_value_two_tailed(0.0, n).p == 1.0);
  const PValue one = p_value_two_tailed(-1.0, 20);
  CHECK(one.p == 0.0);
  CHECK(one.exact);
}

TEST_CASE("r = 0.5, n = 12: p = 0.0976") {
  const double p = p_value_two_tailed(0.5, 12).p;
  CHECK(p == doctest::Approx(0.0976).epsilon(5e-4));
  const double t = 0.5 * std::sqrt(10.0 / 0.75);
  CHECK(p == doctest::Approx(oracle::t_two_tailed_closed_form(t, 10)).epsilon(1e-10));
}

TEST_CASE("p decreases as |r| grows and as n grows") {
  double last = 1.0;
  for (double r = 0.05; r < 1.0; r += 0.05) {
    const double p = p_value_two_tailed(r, 30).p;
    CHECK(p < last);
    CHECK(p == doctest::Approx(p_value_two_tailed(-r, 30).p));
    last = p;
  }
  CHECK(p_value_two_tailed(0.3, 100).p < p_value_two_tailed(0.3, 50).p);
}

TEST_CASE("p matches the closed-form series over many df") {
  oracle::Stream s(42);
  for (int k = 0; k < 200; ++k) {
    const long n = 3 + static_cast<long>(s.unit() * 80);
    const double r = s.range(-0.95, 0.95);
    const double df = static_cast<double>(n - 2);
    const double t = r * std::sqrt(df / (1 - r * r));
    CHECK(p_value_two_tailed(r, n).p ==
          doctest::Approx(oracle::t_two_tailed_closed_form(t, static_cast<int>(n - 2))).epsilon(1e-9));
  }
}

TEST_CASE("published t table: 10 cases to 4 significant figures") {
  const oracle::Json fx = oracle::find_fixture(CRUSHMI_FIXTURE_DIR, "t_table");
  const auto& in = fx["input"]["cases"];
  const auto& ex = fx["expected"]["cases"];
  REQUIRE(in.size() == 10);
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double p = p_value_two_tailed(ex[i]["r"].get<double>(), ex[i]["n"].get<long>()).p;
    CAPTURE(i);
    CHECK(sig4(p, in[i]["alpha"].get<double>()));
    CHECK(sig4(p, ex[i]["p"].get<double>()));
  }
}

TEST_CASE("incomplete beta: symmetry and a closed form") {
  CHECK(regularized_incomplete_beta(1.0, 1.0, 0.3) == doctest::Approx(0.3));
  CHECK(regularized_incomplete_beta(2.0, 3.0, 0.4) == doctest::Approx(1.0 - regularized_incomplete_beta(3.0, 2.0, 0.6)));
  // I_x(a, 1) = x^a
  CHECK(regularized_incomplete_beta(2.5, 1.0, 0.7) == doctest::Approx(std::pow(0.7, 2.5)));
}

TEST_CASE("correlate_series: mi = 1 - force / max gives r = -1") {
  std::vector<double> f, m;
  for (int i = 0; i < 50; ++i) {
    f.push_back(i * 3.0);
    m.push_back(1.0 - f.back() / 147.0);
  }
  const std::vector<MetricsSeries> runs{series_of(f, m)};
  const Correlation c = correlate_series(runs);
  CHECK(c.report.r_p == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(c.report.n == 50);
  CHECK(c.report.significant());
  CHECK(c.scatter.size() == 50);
}

TEST_CASE("correlate_series: constant zero force is undefined; gaps are dropped; runs pool") {
  const std::vector<MetricsSeries> flat{series_of(std::vector<double>(20, 0.0), std::vector<double>(20, 0.5))};
  CHECK_THROWS_AS(correlate_series(flat), UndefinedCorrelation);

  MetricsSeries a = series_of({1, 2, 3, 4, 5}, {5, 4, 3, 2, 1});
  a.records[2].mi_bits.reset();
  const MetricsSeries b = series_of({6, 7, 8}, {0, -1, -2});
  const std::vector<MetricsSeries> runs{a, b};
  const Correlation c = correlate_series(runs, 0.05);
  CHECK(c.report.n == 7);
  CHECK(c.report.alpha == 0.05);
}
