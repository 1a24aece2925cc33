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

#include "crushmi/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace crushmi {

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UndefinedCorrelation("pearson_r: series lengths differ");
  if (x.size() < 3) throw UndefinedCorrelation("pearson_r: need at least 3 pairs");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelation("pearson_r: a series is constant");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("regularized_incomplete_beta: continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw std::domain_error("regularized_incomplete_beta: a and b must be > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("regularized_incomplete_beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

PValue p_value_two_tailed(double r, long n) {
  if (n < 3) throw std::domain_error("p_value_two_tailed: n must be >= 3");
  if (!(r >= -1.0 && r <= 1.0)) throw std::domain_error("p_value_two_tailed: r must lie in [-1, 1]");
  if (std::abs(r) == 1.0) return {0.0, true};
  const double df = static_cast<double>(n - 2);
  // P(|T| > t) = I_{df / (df + t^2)}(df / 2, 1 / 2), and df / (df + t^2) = 1 - r^2.
  const double x = (1.0 - r) * (1.0 + r);
  return {regularized_incomplete_beta(df / 2.0, 0.5, x), false};
}

Correlation correlate_series(std::span<const MetricsSeries> series, double alpha) {
  Correlation out;
  std::vector<double> force, mi;
  for (const MetricsSeries& s : series) {
    for (const MetricsRecord& r : s.records) {
      if (!r.mi_bits || !r.avg_force_N) continue;
      force.push_back(*r.avg_force_N);
      mi.push_back(*r.mi_bits);
      out.scatter.emplace_back(*r.avg_force_N, *r.mi_bits);
    }
  }
  out.report.alpha = alpha;
  out.report.n = static_cast<long>(force.size());
  out.report.r_p = pearson_r(force, mi);
  const PValue p = p_value_two_tailed(out.report.r_p, out.report.n);
  out.report.p_value = p.p;
  out.report.p_exact = p.exact;
  return out;
}

std::string scatter_to_csv(std::span<const std::pair<double, double>> scatter) {
  std::string out = "avg_force_N,mi_bits\n";
  for (const auto& [f, m] : scatter) out += format_double(f) + "," + format_double(m) + "\n";
  return out;
}

}  // namespace crushmi
