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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cotattr {

// Row-major dense design matrix.
struct Design {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Design() = default;
  Design(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
};

struct LassoOptions {
  double tolerance = 1e-8;  // stop when no coefficient moves by more than this
  std::size_t max_sweeps = 100000;
};

struct LassoFit {
  std::vector<double> coef;
  double intercept = 0.0;
  std::size_t sweeps = 0;
  bool converged = false;
};

double soft_threshold(double value, double threshold);

// Minimizes (1/2n) * sum (y - b0 - x.b)^2 + lambda * |b|_1 with an
// unpenalized intercept, by cyclic coordinate descent on centered columns.
// Constant columns get a zero coefficient.
LassoFit lasso_fit(const Design& x, std::span<const double> y, double lambda,
                   LassoOptions options = {});

// Smallest lambda for which every coefficient is zero:
// max_j |xc_j . yc| / n over centered columns.
double lasso_lambda_max(const Design& x, std::span<const double> y);

// Coefficient of determination of a fit on (x, y); 1 when y is constant and
// reproduced exactly. Clamped to [0, 1].
double r_squared(const Design& x, std::span<const double> y, const LassoFit& fit);

}  // namespace cotattr
