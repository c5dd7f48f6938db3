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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cotattr/backend.hpp"
#include "cotattr/record.hpp"

namespace cotattr {

// Which reasoning steps survive an ablation (true = kept).
struct AblationMask {
  std::vector<bool> keep;

  std::size_t size() const { return keep.size(); }
  bool operator==(const AblationMask&) const = default;
};

struct AblationSample {
  AblationMask mask;
  double answer_logprob = 0.0;
};

struct LambdaRule {
  enum class Kind { kFixed, kCrossValidated };
  Kind kind = Kind::kCrossValidated;
  double value = 0.0;        // kFixed
  std::size_t folds = 5;     // kCrossValidated
  std::size_t grid = 20;
  double min_ratio = 1e-4;   // grid spans [min_ratio, 1] * lambda_max

  static LambdaRule fixed(double lambda) { return {Kind::kFixed, lambda}; }
  static LambdaRule cross_validated() { return {}; }
  std::string describe() const;
};

struct AblationConfig {
  std::size_t n_ablations = 32;
  double keep_probability = 0.5;
  std::uint64_t seed = 0;
  LambdaRule lambda_rule;
  std::size_t workers = 1;
  int max_attempts = 3;
};

// Fewer ablations than steps + 1 leave the surrogate underdetermined.
bool identifiable(const AblationConfig& config, std::size_t step_count);

struct AttributionResult {
  std::string id;
  std::vector<double> coefficients;
  double intercept = 0.0;
  double lambda = 0.0;
  std::size_t n_ablations = 0;
  double fit_r2 = 0.0;
  std::uint64_t seed = 0;

  // coefficient / sum of positive coefficients; all zero when none is
  // positive.
  std::vector<double> normalized() const;

  // attributions.jsonl row.
  nlohmann::json to_json() const;
  static AttributionResult from_json(const nlohmann::json& j);
};

// Original prompt, preamble, the kept step lines in order, then the answer
// phrase with its trailing whitespace. The answer digits are left out: they
// are the completion being scored.
std::string render_ablated_prompt(const GenerationRecord& record, const AblationMask& mask);

// n_ablations masks; the first keeps every step, the rest draw each bit
// independently with P(keep) = keep_probability from a mt19937_64 seeded
// with config.seed.
std::vector<AblationMask> sample_masks(const AblationConfig& config, std::size_t step_count);

// Scores the record's answer digits after each ablated prompt. Transient
// backend failures are retried up to config.max_attempts times per sample;
// persistent failure raises AttributionError.
std::vector<AblationSample> collect_samples(const Backend& backend,
                                            const GenerationRecord& record,
                                            std::span<const AblationMask> masks,
                                            const AblationConfig& config = {});

// LASSO surrogate over uncentered binary keep indicators. Throws
// AttributionError when all masks are identical.
AttributionResult fit_surrogate(std::span<const AblationSample> samples, const LambdaRule& rule);

// sample_masks -> collect_samples -> fit_surrogate, tagged with the record id.
AttributionResult attribute_record(const Backend& backend, const GenerationRecord& record,
                                   const AblationConfig& config);

}  // namespace cotattr
