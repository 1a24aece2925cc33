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

#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "crushmi/analysis.hpp"

namespace crushmi {

/// Correlation is not defined for the given data (constant series, too few pairs).
class UndefinedCorrelation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Sample Pearson correlation. Throws UndefinedCorrelation for fewer than 3
/// pairs, unequal lengths or a constant series.
double pearson_r(std::span<const double> x, std::span<const double> y);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

struct PValue {
  double p = 1.0;
  bool exact = false;  // |r| == 1: p is exactly 0
};

/// Two-tailed p for H0: rho = 0, from t = r sqrt((n-2)/(1-r^2)) on n-2 degrees of freedom.
PValue p_value_two_tailed(double r, long n);

struct CorrelationReport {
  double r_p = 0.0;
  double p_value = 1.0;
  bool p_exact = false;
  long n = 0;
  double alpha = 0.01;

  bool significant() const { return p_value < alpha; }
};

struct Correlation {
  CorrelationReport report;
  std::vector<std::pair<double, double>> scatter;  // (avg_force_N, mi_bits)
};

/// Pools (avg_force_N, mi_bits) pairs from every series, dropping records
/// where either is a gap, and tests their correlation.
Correlation correlate_series(std::span<const MetricsSeries> series, double alpha = 0.01);

std::string scatter_to_csv(std::span<const std::pair<double, double>> scatter);

}  // namespace crushmi
