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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cotattr/dfa.hpp"
#include "cotattr/evalstats.hpp"
#include "cotattr/grammar.hpp"
#include "cotattr/lasso.hpp"
#include "cotattr/perturb.hpp"
#include "cotattr/pipeline.hpp"
#include "cotattr/saliency.hpp"
#include "cotattr/step_attrib.hpp"
#include "cotattr/utf8.hpp"
#include "support.hpp"

#ifndef COTATTR_SOURCE_DIR
#define COTATTR_SOURCE_DIR "."
#endif

namespace fs = std::filesystem;
using namespace cotattr;
using testing::char_vocab;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& what) {
  if (!cond) throw Failure(what);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Grammar soundness

std::map<TokenId, double> random_dist(std::mt19937_64& rng, const Vocabulary& v,
                                      const std::vector<TokenId>& favored) {
  std::map<TokenId, double> d;
  std::uniform_int_distribution<TokenId> any(0, static_cast<TokenId>(v.size() - 1));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int picks = 3 + static_cast<int>(rng() % 6);
  std::vector<double> w;
  std::vector<TokenId> ids;
  for (int i = 0; i < picks; ++i) {
    ids.push_back(u(rng) < 0.6 ? favored[rng() % favored.size()] : any(rng));
    w.push_back(u(rng) + 0.05);
  }
  double total = 0.0;
  for (double x : w) total += x;
  const double mass = 0.5 + 0.5 * u(rng);
  for (std::size_t i = 0; i < ids.size(); ++i) d[ids[i]] += mass * w[i] / total;
  return d;
}

MockBackend random_mock(std::mt19937_64& rng, const Vocabulary& v) {
  std::vector<TokenId> favored;
  for (const char* s : {"\n", ".", "-", " ", "7", "12", ".\n", "\n- ", "The answer is",
                        "Step-by-Step Answer:", "Step", " is", "<|endoftext|>"}) {
    for (TokenId i = 0; i < v.size(); ++i) {
      if (v.surface(i) == s) favored.push_back(i);
    }
  }
  MockTable t;
  t.order = 1 + rng() % 2;
  t.fallback = random_dist(rng, v, favored);
  const int n_contexts = 10 + static_cast<int>(rng() % 30);
  for (int c = 0; c < n_contexts; ++c) {
    TokenSeq key;
    for (std::size_t k = 0; k < t.order; ++k) key.push_back(favored[rng() % favored.size()]);
    t.contexts[key] = random_dist(rng, v, favored);
  }
  return MockBackend(v, std::move(t));
}

Outcome criterion_grammar_soundness() {
  const auto t0 = std::chrono::steady_clock::now();
  Vocabulary v = char_vocab({"Step-by-Step Answer:", "Step", "-by-", " Answer:\n", "\n- ",
                             ".\n", "The answer is", "The", " answer", " is", "12", "305",
                             " 4", "3.", "- ", ". ", "\xc3\xa9", "\xe3\x80\x82"});
  const LanguageConfig en = LanguageConfig::english();
  LanguageConfig odd_cfg = en;
  odd_cfg.code = "xx";
  odd_cfg.preamble = "Go (step) by step?";
  odd_cfg.answer_phrase = "Result: [final]";
  odd_cfg.terminators = {".", "\xe3\x80\x82"};
  const LanguageConfig& odd = odd_cfg;

  struct Target {
    GrammarTemplate tmpl;
    const LanguageConfig* lang;
    TokenMaskIndex index;
    Dfa dfa;
  };
  std::vector<Target> targets;
  for (const LanguageConfig* lang : {&en, &odd}) {
    for (TemplateId id : {TemplateId::kCot, TemplateId::kAnswerOnly}) {
      GrammarTemplate g{id};
      targets.push_back({g, lang, build_grammar(g, *lang, v), compile(g, *lang)});
    }
  }

  std::mt19937_64 rng(20240601);
  const TokenSeq prompt = v.tokenize("Q: count.\n");
  std::size_t runs = 0, accepted = 0, violations = 0;
  for (int table = 0; table < 64; ++table) {
    const MockBackend backend = random_mock(rng, v);
    for (const auto& t : targets) {
      for (int s = 0; s < 4; ++s) {
        const DecodeMode mode = s == 0 ? DecodeMode::greedy() : DecodeMode::sampled(rng());
        const Generation g = constrained_generate(backend, &t.index, prompt, {256}, mode);
        ++runs;
        if (g.finish != FinishReason::kAccepted) continue;
        ++accepted;
        if (!check_compliance(g.text, t.dfa)) ++violations;
      }
    }
  }
  const double secs = seconds_since(t0);
  require(runs >= 1000, "fewer than 1000 generations");
  require(accepted > 0, "no generation reached end-of-text");
  require(violations == 0, std::to_string(violations) + " accepted outputs not compliant");
  require(secs < 60.0, "took " + fmt("%.1f s", secs));
  return {true, std::to_string(runs) + " generations, " + std::to_string(accepted) +
                    " accepted, 0 violations, " + fmt("%.2f s", secs)};
}

// ---------------------------------------------------------------------------
// 2. Mask-index equivalence

// Each pattern comes in two dialects: ours, and ECMAScript for std::regex.
// Our '.' excludes only '\n'; ECMAScript's also excludes '\r' and U+2028/9.
struct Pattern {
  std::string ours;
  std::string ecma;
};

Pattern random_atom(std::mt19937_64& rng) {
  static const std::vector<std::string> atoms = {"a", "b", "c", "1", "\\.", "-", "\\d",
                                                 "[ab]", "[^a]", "[a-c]", "\\n", "."};
  const std::string a = atoms[rng() % atoms.size()];
  return {a, a == "." ? "[^\\n]" : a};
}

Pattern wrap(const Pattern& p, const std::string& open, const std::string& close) {
  return {open + p.ours + close, open + p.ecma + close};
}

Pattern random_regex(std::mt19937_64& rng, int depth) {
  if (depth == 0) return random_atom(rng);
  switch (rng() % 6) {
    case 0: {
      const Pattern l = random_regex(rng, depth - 1), r = random_regex(rng, depth - 1);
      return {l.ours + r.ours, l.ecma + r.ecma};
    }
    case 1: {
      const Pattern l = random_regex(rng, depth - 1), r = random_regex(rng, depth - 1);
      return {"(?:" + l.ours + "|" + r.ours + ")", "(?:" + l.ecma + "|" + r.ecma + ")"};
    }
    case 2:
      return wrap(random_regex(rng, depth - 1), "(?:", ")*");
    case 3:
      return wrap(random_regex(rng, depth - 1), "(?:", ")+");
    case 4:
      return wrap(random_regex(rng, depth - 1), "(?:", ")?");
    default: {
      const int lo = static_cast<int>(rng() % 3);
      const int hi = lo + static_cast<int>(rng() % 3);
      return wrap(random_regex(rng, depth - 1), "(?:",
                  "){" + std::to_string(lo) + "," + std::to_string(hi) + "}");
    }
  }
}

const std::string kAlphabet = "abc1-.\n";

std::string random_word(std::mt19937_64& rng, std::size_t max_len) {
  std::string s;
  const std::size_t n = 1 + rng() % max_len;
  for (std::size_t i = 0; i < n; ++i) s += kAlphabet[rng() % kAlphabet.size()];
  return s;
}

Outcome criterion_mask_equivalence() {
  std::mt19937_64 rng(77);
  std::size_t checks = 0, cross = 0;
  for (int pair = 0; pair < 100; ++pair) {
    const Pattern p = random_regex(rng, 3);
    const std::string& pattern = p.ours;
    const Dfa dfa = Dfa::from_regex(pattern);

    // Independent full-match cross-check of the automaton itself.
    const std::regex re(p.ecma, std::regex::ECMAScript);
    for (int k = 0; k < 200; ++k) {
      const std::string w = rng() % 10 == 0 ? std::string() : random_word(rng, 6);
      const std::u32string u(w.begin(), w.end());
      require(dfa.matches(u) == std::regex_match(w, re),
              "DFA disagrees with std::regex on /" + pattern + "/ for \"" + w + "\"");
      ++cross;
    }

    // Vocabulary: random words, a multi-byte scalar, a malformed byte,
    // end-of-text and one extra special token.
    std::vector<std::string> surfaces = {"<eot>"};
    std::set<std::string> seen;
    const std::size_t n_words = 6 + rng() % 15;
    while (surfaces.size() < n_words + 1) {
      std::string w = random_word(rng, 3);
      if (seen.insert(w).second) surfaces.push_back(w);
    }
    surfaces.push_back("\xc3\xa9");
    surfaces.push_back("\xff");
    surfaces.push_back("<pad>");
    const TokenId pad = static_cast<TokenId>(surfaces.size() - 1);
    const Vocabulary vocab(surfaces, 0, {pad});
    const TokenMaskIndex index = TokenMaskIndex::build(dfa, vocab);

    for (Dfa::State s = 0; s < static_cast<Dfa::State>(dfa.num_states()); ++s) {
      std::vector<TokenId> expect;
      for (TokenId t = 0; t < vocab.size(); ++t) {
        Dfa::State sim = Dfa::kDead;
        if (t == vocab.eot()) {
          sim = dfa.accepting(s) ? s : Dfa::kDead;
        } else if (!vocab.is_special(t)) {
          const auto scalars = utf8::decode(vocab.surface(t));
          if (scalars) {
            sim = s;
            for (char32_t c : *scalars) {
              sim = dfa.step(sim, c);
              if (sim == Dfa::kDead) break;
            }
          }
        }
        const bool ok = sim != Dfa::kDead;
        require(index.allowed(s, t) == ok, "allowed() mismatch on /" + pattern + "/");
        require(index.next(s, t) == sim, "next() mismatch on /" + pattern + "/");
        if (ok) expect.push_back(t);
        ++checks;
      }
      require(index.allowed_tokens(s) == expect, "allowed_tokens() mismatch on /" + pattern + "/");
      require(index.allowed_count(s) == expect.size(), "allowed_count() mismatch");
    }
  }
  return {true, "100 pairs, " + std::to_string(checks) + " state/token cells, " +
                    std::to_string(cross) + " regex cross-checks"};
}

// ---------------------------------------------------------------------------
// 3. LASSO oracle

Outcome criterion_lasso() {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 5 + rng() % 40;
    Design x(n, 1);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x(i, 0) = trial % 2 ? static_cast<double>(rng() % 2) : g(rng);
      y[i] = 0.7 * x(i, 0) + g(rng);
    }
    double xm = 0, ym = 0;
    for (std::size_t i = 0; i < n; ++i) xm += x(i, 0), ym += y[i];
    xm /= n;
    ym /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sxy += (x(i, 0) - xm) * (y[i] - ym);
      sxx += (x(i, 0) - xm) * (x(i, 0) - xm);
    }
    if (sxx == 0.0) continue;
    const double lambda = u(rng) * 1.2 * std::abs(sxy) / n;
    const double rho = sxy / n;
    const double st = rho > lambda ? rho - lambda : (rho < -lambda ? rho + lambda : 0.0);
    const double beta = st / (sxx / n);
    const double b0 = ym - beta * xm;
    const LassoFit fit = lasso_fit(x, y, lambda);
    worst = std::max({worst, std::abs(fit.coef[0] - beta), std::abs(fit.intercept - b0)});
  }
  require(worst <= 1e-10, "1-D error " + fmt("%.3g", worst));

  const std::vector<double> planted = {0.1, 0.3, 0.6};
  double worst_coef = 0.0, min_r2 = 1.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto backend = testing::step_backend(3, [&](const std::vector<bool>& keep) {
      double lp = -3.0;
      for (std::size_t i = 0; i < 3; ++i) lp += keep[i] ? planted[i] : 0.0;
      return lp;
    });
    AblationConfig cfg;
    cfg.seed = seed;
    cfg.lambda_rule = LambdaRule::fixed(1e-6);
    const AttributionResult r = attribute_record(backend, testing::make_record(3), cfg);
    for (std::size_t i = 0; i < 3; ++i) {
      worst_coef = std::max(worst_coef, std::abs(r.coefficients[i] - planted[i]));
    }
    min_r2 = std::min(min_r2, r.fit_r2);
  }
  require(worst_coef <= 1e-3, "planted coefficient error " + fmt("%.3g", worst_coef));
  require(min_r2 >= 0.99, "fit_r2 " + fmt("%.4f", min_r2));
  return {true, "1-D max error " + fmt("%.2g", worst) + "; planted max error " +
                    fmt("%.2g", worst_coef) + ", min r2 " + fmt("%.6f", min_r2)};
}

// ---------------------------------------------------------------------------
// 4. Attribution localization

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

Outcome criterion_localization() {
  const double hi = std::log(0.9), lo = std::log(0.1);
  std::size_t cases = 0;
  for (std::size_t n = 3; n <= 8; ++n) {
    const GenerationRecord record = testing::make_record(n);
    for (std::size_t k = 0; k < n; ++k) {
      const auto backend = testing::step_backend(
          n, [k, hi, lo](const std::vector<bool>& keep) { return keep[k] ? hi : lo; });

      // Exhaustive oracle: main effect of each step over all 2^n masks,
      // scored through the backend.
      std::vector<AblationMask> all;
      for (std::size_t bits = 0; bits < (std::size_t{1} << n); ++bits) {
        AblationMask m;
        for (std::size_t i = 0; i < n; ++i) m.keep.push_back((bits >> i) & 1);
        all.push_back(m);
      }
      const auto samples = collect_samples(backend, record, all);
      std::vector<double> effect(n, 0.0);
      for (const auto& s : samples) {
        for (std::size_t i = 0; i < n; ++i) {
          effect[i] += (s.mask.keep[i] ? 1.0 : -1.0) * s.answer_logprob;
        }
      }
      for (double& e : effect) e /= static_cast<double>(samples.size()) / 2.0;
      require(argmax(effect) == k, "exhaustive oracle does not single out the planted step");

      AblationConfig cfg;
      cfg.seed = 1000 * n + k;
      const AttributionResult r = attribute_record(backend, record, cfg);
      require(argmax(r.coefficients) == k,
              "n=" + std::to_string(n) + " k=" + std::to_string(k) + ": argmax " +
                  std::to_string(argmax(r.coefficients)));
      ++cases;
    }
  }
  return {true, std::to_string(cases) + " (chain, step) cases over 3-8 steps"};
}

// ---------------------------------------------------------------------------
// 5. Statistics oracle

Outcome criterion_statistics() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int set = 0; set < 100; ++set) {
    const std::size_t n = 2 + rng() % 30;
    std::vector<Point> pts(n);
    for (auto& p : pts) p = {u(rng), 10.0 * u(rng) - 5.0};
    // Normal equations [n Sx; Sx Sxx] [b0; b1] = [Sy; Sxy] by Cramer's rule.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : pts) sx += p.x, sy += p.y, sxx += p.x * p.x, sxy += p.x * p.y;
    const double det = n * sxx - sx * sx;
    const double b1 = (n * sxy - sx * sy) / det;
    const double b0 = (sxx * sy - sx * sxy) / det;
    const SlopeFit f = fit_slope(pts);
    worst = std::max({worst, std::abs(f.slope - b1), std::abs(f.intercept - b0)});
  }
  require(worst <= 1e-10, "slope error " + fmt("%.3g", worst));
  require(normalized_position(0, 4) == 0.0, "normalized_position(0,4)");
  require(normalized_position(3, 4) == 1.0, "normalized_position(3,4)");
  require(normalized_position(1, 3) == 0.5, "normalized_position(1,3)");
  const std::vector<double> xs = {2.0, 4.0};
  const MeanSe m = mean_se(xs);
  require(m.mean == 3.0 && std::abs(m.se - 1.0) <= 1e-15, "mean_se([2,4])");
  return {true, "100 point sets, max error " + fmt("%.2g", worst) +
                    "; positions exact; se([2,4]) = " + fmt("%.17g", m.se)};
}

// ---------------------------------------------------------------------------
// 6. Saliency aggregation

Outcome criterion_saliency() {
  ScoreGrid col(2, 1);
  col(0, 0) = 3.0;
  col(1, 0) = 4.0;
  const NormalizedGrid n = normalize_columns(col);
  require(n.grid(0, 0) == 0.6 && n.grid(1, 0) == 0.8, "[3,4] does not normalize to [0.6,0.8]");

  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_scale = 0.0, worst_additive = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    SaliencyMatrix m;
    m.inputs = 4 + rng() % 12;
    m.outputs = 1 + rng() % 5;
    m.width = 1 + rng() % 4;
    m.values.resize(m.inputs * m.outputs * m.width);
    for (double& v : m.values) v = g(rng);
    // Odd trials use a power of two, where rounding cannot differ and the
    // normalized grids must agree bit for bit.
    const bool dyadic = trial % 2 == 1;
    const double c = dyadic ? std::ldexp(1.0, static_cast<int>(rng() % 21) - 10)
                            : std::exp(6.0 * u(rng) - 3.0);
    SaliencyMatrix scaled = m;
    for (double& v : scaled.values) v *= c;

    const ScoreGrid a = collapse_embedding(m);
    const ScoreGrid b = collapse_embedding(scaled);
    const NormalizedGrid na = normalize_columns(a);
    const NormalizedGrid nb = normalize_columns(b);
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      worst_scale = std::max(worst_scale, std::abs(b.values[i] - c * a.values[i]) /
                                              std::max(1.0, std::abs(c * a.values[i])));
      worst_scale = std::max(worst_scale, std::abs(nb.grid.values[i] - na.grid.values[i]));
      if (dyadic) require(nb.grid.values[i] == na.grid.values[i], "power-of-two scale not exact");
    }

    // A span's sum equals the sum over any partition of it.
    const std::size_t cut = 1 + rng() % (m.inputs - 2);
    std::vector<std::size_t> cols(m.outputs);
    for (std::size_t j = 0; j < m.outputs; ++j) cols[j] = j;
    const std::vector<LabeledSpan> whole = {{"w", 0, m.inputs}};
    const std::vector<LabeledSpan> parts = {{"l", 0, cut}, {"r", cut, m.inputs}};
    const auto tw = aggregate_steps(na.grid, whole, cols);
    const auto tp = aggregate_steps(na.grid, parts, cols);
    for (std::size_t j = 0; j < m.outputs; ++j) {
      const double lhs = tw.at(0, j) * m.inputs;
      const double rhs = tp.at(0, j) * cut + tp.at(1, j) * (m.inputs - cut);
      worst_additive = std::max(worst_additive, std::abs(lhs - rhs));
    }
  }
  require(worst_scale <= 1e-12, "scale covariance error " + fmt("%.3g", worst_scale));
  require(worst_additive <= 1e-12, "partition additivity error " + fmt("%.3g", worst_additive));
  return {true, "[3,4] -> [0.6,0.8] exact; power-of-two scales exact, other scale error " + fmt("%.2g", worst_scale) +
                    ", additivity error " + fmt("%.2g", worst_additive)};
}

// ---------------------------------------------------------------------------
// 7. Perturbation fidelity

Outcome criterion_perturbation() {
  const Problem roger{"roger", "en",
                      "Roger has 5 tennis balls. He buys 2 more cans of tennis balls. Each can "
                      "has 3 tennis balls. How many tennis balls does he have now?",
                      11};
  const LanguageConfig en = LanguageConfig::english();
  const Perturbed neg = negate(roger, en);
  const Perturbed dis = distract(roger, en);
  require(neg.question ==
              "Roger has 5 tennis balls. He does not buy 2 more cans of tennis balls. Each can "
              "has 3 tennis balls. How many tennis balls does he have now?",
          "negation: " + neg.question);
  require(neg.spec.target == std::optional<std::size_t>(1), "negation target");
  require(dis.question ==
              "Roger has 5 tennis balls. He buys 2 more cans of tennis balls. Each can has 3 "
              "tennis balls. Roger drinks 3 cans of soda. How many tennis balls does he have now?",
          "distractor: " + dis.question);
  require(dis.spec.target == std::optional<std::size_t>(3), "distractor position");
  return {true, "negation and distractor texts byte-exact"};
}

// ---------------------------------------------------------------------------
// 8. Pipeline determinism

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) {
      files[fs::relative(e.path(), dir).generic_string()] = testing::slurp(e.path());
    }
  }
  return files;
}

Outcome criterion_pipeline() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path cfg_path = fs::path(COTATTR_SOURCE_DIR) / "data" / "demo" / "run.json";
  const nlohmann::json raw = read_config_json(cfg_path);
  const fs::path tmp = testing::temp_dir("determinism");

  std::vector<std::string> hashes;
  std::vector<std::map<std::string, std::string>> reports;
  for (std::size_t workers : {1, 3}) {
    CliOverrides o;
    o.workers = workers;
    o.out = tmp / ("run" + std::to_string(workers));
    const RunConfig c = apply_overrides(raw, cfg_path.parent_path(), o);
    c.validate();
    const auto backend = make_backend(c);
    const StageResult g = run_generate(c, *backend);
    const StageResult a = run_attribute(c, *backend);
    run_report(c);
    require(g.failures == 0 && a.failures == 0, "stage failures");
    require(a.written > 0, "no attributions written");
    hashes.push_back(c.hash());
    reports.push_back(snapshot(RunPaths{c.output_dir}.report_dir()));
  }
  const double secs = seconds_since(t0);
  fs::remove_all(tmp);
  require(hashes[0] == hashes[1], "config hashes differ");
  require(!reports[0].empty(), "empty report directory");
  require(reports[0] == reports[1], "report directories differ");
  require(secs < 300.0, "took " + fmt("%.1f s", secs));
  return {true, std::to_string(reports[0].size()) + " report files identical across 1 and 3 "
                    "workers, hash " + hashes[0] + ", " + fmt("%.2f s", secs)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"grammar soundness", criterion_grammar_soundness},
      {"mask-index equivalence", criterion_mask_equivalence},
      {"LASSO oracle", criterion_lasso},
      {"attribution localization", criterion_localization},
      {"statistics oracle", criterion_statistics},
      {"saliency aggregation", criterion_saliency},
      {"perturbation fidelity", criterion_perturbation},
      {"pipeline determinism", criterion_pipeline},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << " ("
              << criteria[i].first << "): " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed ? 1 : 0;
}
