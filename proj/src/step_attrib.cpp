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

#include "cotattr/step_attrib.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include "cotattr/errors.hpp"
#include "cotattr/lasso.hpp"

namespace cotattr {

using nlohmann::json;

std::string LambdaRule::describe() const {
  if (kind == Kind::kFixed) return "fixed(" + std::to_string(value) + ")";
  return "cv(folds=" + std::to_string(folds) + ",grid=" + std::to_string(grid) + ")";
}

bool identifiable(const AblationConfig& config, std::size_t step_count) {
  return config.n_ablations >= step_count + 1;
}

std::vector<double> AttributionResult::normalized() const {
  double pos = 0.0;
  for (double c : coefficients) pos += std::max(c, 0.0);
  std::vector<double> out(coefficients.size(), 0.0);
  if (pos <= 0.0) return out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = coefficients[i] / pos;
  return out;
}

json AttributionResult::to_json() const {
  return {{"id", id},          {"mask_count", n_ablations}, {"coeffs", coefficients},
          {"coeffs_norm", normalized()}, {"intercept", intercept},
          {"lambda", lambda},  {"r2", fit_r2},              {"seed", seed}};
}

AttributionResult AttributionResult::from_json(const json& j) {
  AttributionResult r;
  try {
    r.id = j.at("id").get<std::string>();
    r.n_ablations = j.at("mask_count").get<std::size_t>();
    r.coefficients = j.at("coeffs").get<std::vector<double>>();
    r.intercept = j.at("intercept").get<double>();
    r.lambda = j.at("lambda").get<double>();
    r.fit_r2 = j.at("r2").get<double>();
    r.seed = j.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw DataError(std::string("attribution row: ") + e.what());
  }
  return r;
}

std::string render_ablated_prompt(const GenerationRecord& record, const AblationMask& mask) {
  if (!record.compliant()) {
    throw AttributionError("record " + record.id + " is not grammar-compliant");
  }
  if (mask.size() != record.parsed.steps.size()) {
    throw AttributionError("mask length " + std::to_string(mask.size()) +
                           " does not match step count " +
                           std::to_string(record.parsed.steps.size()));
  }
  std::string out = record.prompt + record.parsed.preamble + "\n";
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask.keep[i]) out += record.parsed.steps[i] + "\n";
  }
  out += record.parsed.answer_lead;
  return out;
}

std::vector<AblationMask> sample_masks(const AblationConfig& config, std::size_t step_count) {
  if (step_count == 0) throw AttributionError("sample_masks: no steps to ablate");
  std::vector<AblationMask> masks;
  if (config.n_ablations == 0) return masks;
  masks.reserve(config.n_ablations);
  masks.push_back({std::vector<bool>(step_count, true)});
  std::mt19937_64 rng(config.seed);
  for (std::size_t m = 1; m < config.n_ablations; ++m) {
    AblationMask mask{std::vector<bool>(step_count)};
    for (std::size_t i = 0; i < step_count; ++i) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      mask.keep[i] = u < config.keep_probability;
    }
    masks.push_back(std::move(mask));
  }
  return masks;
}

namespace {

double score_with_retry(const Backend& backend, const TokenSeq& prefix,
                        const TokenSeq& completion, int max_attempts) {
  std::string last_error;
  for (int attempt = 0; attempt < std::max(1, max_attempts); ++attempt) {
    try {
      const double lp = backend.score_completion(prefix, completion);
      if (!std::isfinite(lp)) throw BackendError("non-finite log-probability");
      return lp;
    } catch (const ContextOverflow&) {
      throw;
    } catch (const CapabilityMissing&) {
      throw;
    } catch (const BackendError& e) {
      last_error = e.what();
    }
  }
  throw AttributionError("scoring failed after " + std::to_string(max_attempts) +
                         " attempts: " + last_error);
}

}  // namespace

std::vector<AblationSample> collect_samples(const Backend& backend,
                                            const GenerationRecord& record,
                                            std::span<const AblationMask> masks,
                                            const AblationConfig& config) {
  if (!backend.capabilities().supports_logprob_scoring) {
    throw CapabilityMissing("backend cannot score completions");
  }
  if (record.parsed.answer_text.empty()) {
    throw AttributionError("record " + record.id + " has no answer digits");
  }
  const TokenSeq completion = backend.tokenize(record.parsed.answer_text);
  std::vector<std::string> prompts;
  prompts.reserve(masks.size());
  for (const auto& m : masks) prompts.push_back(render_ablated_prompt(record, m));

  std::vector<AblationSample> out(masks.size());
  auto work = [&](std::size_t i) {
    const TokenSeq prefix = backend.tokenize(prompts[i]);
    out[i] = {masks[i], score_with_retry(backend, prefix, completion, config.max_attempts)};
  };

  const std::size_t workers = std::min(std::max<std::size_t>(config.workers, 1), masks.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < masks.size(); ++i) work(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < masks.size(); i = next++) {
        try {
          work(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

namespace {

Design design_from(std::span<const AblationSample> samples, std::span<const std::size_t> rows) {
  const std::size_t p = samples.front().mask.size();
  Design d(rows.size(), p);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& keep = samples[rows[r]].mask.keep;
    for (std::size_t j = 0; j < p; ++j) d(r, j) = keep[j] ? 1.0 : 0.0;
  }
  return d;
}

std::vector<double> targets_from(std::span<const AblationSample> samples,
                                 std::span<const std::size_t> rows) {
  std::vector<double> y;
  y.reserve(rows.size());
  for (std::size_t r : rows) y.push_back(samples[r].answer_logprob);
  return y;
}

double choose_lambda(std::span<const AblationSample> samples, const LambdaRule& rule,
                     double lambda_max) {
  if (lambda_max <= 0.0) return 0.0;
  const std::size_t n = samples.size();
  const std::size_t folds = std::min(std::max<std::size_t>(rule.folds, 2), n);
  const std::size_t grid = std::max<std::size_t>(rule.grid, 1);

  std::vector<double> lambdas(grid);
  for (std::size_t g = 0; g < grid; ++g) {
    const double t = grid == 1 ? 0.0 : static_cast<double>(g) / static_cast<double>(grid - 1);
    lambdas[g] = lambda_max * std::pow(rule.min_ratio, t);
  }

  double best_err = std::numeric_limits<double>::infinity();
  double best_lambda = lambdas.front();
  for (double lambda : lambdas) {
    double err = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<std::size_t> train;
      std::vector<std::size_t> valid;
      for (std::size_t i = 0; i < n; ++i) (i % folds == f ? valid : train).push_back(i);
      const Design x = design_from(samples, train);
      const auto y = targets_from(samples, train);
      const LassoFit fit = lasso_fit(x, y, lambda);
      for (std::size_t i : valid) {
        double pred = fit.intercept;
        const auto& keep = samples[i].mask.keep;
        for (std::size_t j = 0; j < keep.size(); ++j) pred += keep[j] ? fit.coef[j] : 0.0;
        const double r = samples[i].answer_logprob - pred;
        err += r * r;
      }
    }
    err /= static_cast<double>(n);
    if (err < best_err) {
      best_err = err;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

}  // namespace

AttributionResult fit_surrogate(std::span<const AblationSample> samples, const LambdaRule& rule) {
  if (samples.empty()) throw AttributionError("fit_surrogate: no samples");
  const std::size_t p = samples.front().mask.size();
  bool distinct = false;
  for (const auto& s : samples) {
    if (s.mask.size() != p) throw AttributionError("fit_surrogate: mask lengths differ");
    if (!(s.mask == samples.front().mask)) distinct = true;
  }
  if (!distinct) throw AttributionError("fit_surrogate: degenerate design (all masks identical)");

  std::vector<std::size_t> all(samples.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const Design x = design_from(samples, all);
  const auto y = targets_from(samples, all);

  AttributionResult r;
  if (rule.kind == LambdaRule::Kind::kFixed) {
    if (!(rule.value >= 0.0)) throw AttributionError("fit_surrogate: negative lambda");
    r.lambda = rule.value;
  } else {
    r.lambda = choose_lambda(samples, rule, lasso_lambda_max(x, y));
  }
  const LassoFit fit = lasso_fit(x, y, r.lambda);
  r.coefficients = fit.coef;
  r.intercept = fit.intercept;
  r.n_ablations = samples.size();
  r.fit_r2 = r_squared(x, y, fit);
  return r;
}

AttributionResult attribute_record(const Backend& backend, const GenerationRecord& record,
                                   const AblationConfig& config) {
  if (!record.compliant()) {
    throw AttributionError("record " + record.id + " is not grammar-compliant");
  }
  const auto masks = sample_masks(config, record.parsed.steps.size());
  const auto samples = collect_samples(backend, record, masks, config);
  AttributionResult r = fit_surrogate(samples, config.lambda_rule);
  r.id = record.id;
  r.seed = config.seed;
  return r;
}

}  // namespace cotattr
