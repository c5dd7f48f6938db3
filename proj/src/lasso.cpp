// Copyright 2026 The cotattr Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cotattr/lasso.hpp"

#include <algorithm>
#include <cmath>

#include "cotattr/errors.hpp"

namespace cotattr {

double soft_threshold(double value, double threshold) {
  if (value > threshold) return value - threshold;
  if (value < -threshold) return value + threshold;
  return 0.0;
}

namespace {

struct Centered {
  std::vector<double> x;  // column-major, centered
  std::vector<double> x_mean;
  std::vector<double> y;
  double y_mean = 0.0;
};

Centered center(const Design& d, std::span<const double> y) {
  if (y.size() != d.rows) throw AttributionError("lasso: response length does not match design");
  if (d.rows == 0) throw AttributionError("lasso: empty design");
  const auto n = static_cast<double>(d.rows);
  Centered c;
  c.x.resize(d.rows * d.cols);
  c.x_mean.assign(d.cols, 0.0);
  for (std::size_t j = 0; j < d.cols; ++j) {
    double m = 0.0;
    for (std::size_t i = 0; i < d.rows; ++i) m += d(i, j);
    m /= n;
    c.x_mean[j] = m;
    for (std::size_t i = 0; i < d.rows; ++i) c.x[j * d.rows + i] = d(i, j) - m;
  }
  for (double v : y) c.y_mean += v;
  c.y_mean /= n;
  c.y.resize(d.rows);
  for (std::size_t i = 0; i < d.rows; ++i) c.y[i] = y[i] - c.y_mean;
  return c;
}

}  // namespace

LassoFit lasso_fit(const Design& x, std::span<const double> y, double lambda,
                   LassoOptions options) {
  if (!(lambda >= 0.0)) throw AttributionError("lasso: lambda must be non-negative");
  const Centered c = center(x, y);
  const std::size_t n = x.rows;
  const std::size_t p = x.cols;
  const auto nd = static_cast<double>(n);

  std::vector<double> sq(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    const double* col = &c.x[j * n];
    for (std::size_t i = 0; i < n; ++i) sq[j] += col[i] * col[i];
    sq[j] /= nd;
  }

  LassoFit fit;
  fit.coef.assign(p, 0.0);
  std::vector<double> resid = c.y;
  for (fit.sweeps = 1; fit.sweeps <= options.max_sweeps; ++fit.sweeps) {
    double max_delta = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      if (sq[j] <= 0.0) continue;
      const double* col = &c.x[j * n];
      double rho = 0.0;
      for (std::size_t i = 0; i < n; ++i) rho += col[i] * resid[i];
      rho = rho / nd + sq[j] * fit.coef[j];
      const double updated = soft_threshold(rho, lambda) / sq[j];
      const double delta = updated - fit.coef[j];
      if (delta != 0.0) {
        for (std::size_t i = 0; i < n; ++i) resid[i] -= col[i] * delta;
        fit.coef[j] = updated;
      }
      max_delta = std::max(max_delta, std::abs(delta));
    }
    if (max_delta < options.tolerance) {
      fit.converged = true;
      break;
    }
  }
  fit.sweeps = std::min(fit.sweeps, options.max_sweeps);
  fit.intercept = c.y_mean;
  for (std::size_t j = 0; j < p; ++j) fit.intercept -= c.x_mean[j] * fit.coef[j];
  return fit;
}

double lasso_lambda_max(const Design& x, std::span<const double> y) {
  const Centered c = center(x, y);
  double best = 0.0;
  for (std::size_t j = 0; j < x.cols; ++j) {
    double dot = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) dot += c.x[j * x.rows + i] * c.y[i];
    best = std::max(best, std::abs(dot) / static_cast<double>(x.rows));
  }
  return best;
}

double r_squared(const Design& x, std::span<const double> y, const LassoFit& fit) {
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    double pred = fit.intercept;
    for (std::size_t j = 0; j < x.cols; ++j) pred += x(i, j) * fit.coef[j];
    ss_res += (y[i] - pred) * (y[i] - pred);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  // Responses equal up to rounding count as constant.
  const double tol = 1e-20 * static_cast<double>(y.size()) * std::max(1.0, mean * mean);
  if (ss_tot <= tol) return ss_res <= tol ? 1.0 : 0.0;
  return std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
}

}  // namespace cotattr
