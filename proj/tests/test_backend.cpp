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

#include <doctest.h>

#include <cmath>

#include "cotattr/backend.hpp"
#include "cotattr/errors.hpp"

using namespace cotattr;
using nlohmann::json;

namespace {

// Vocabulary {0:"a", 1:"b", 2:"ab"} plus end-of-text at 3.
json ab_vocab() { return {{"tokens", {"a", "b", "ab", "<eot>"}}, {"eot", 3}}; }

MockBackend ab_mock(json extra = json::object()) {
  json j = {{"vocab", ab_vocab()}, {"order", 1}, {"context_limit", 4}};
  j.update(extra);
  return MockBackend::from_json(j);
}

}  // namespace

TEST_CASE("longest-match tokenization") {
  const MockBackend m = ab_mock();
  CHECK(m.tokenize("").empty());
  CHECK(m.tokenize("ab") == TokenSeq{2});
  CHECK(m.tokenize("ba") == TokenSeq{1, 0});
  CHECK(m.detokenize(TokenSeq{1, 2, 3}) == "bab");
  CHECK_THROWS_AS(m.tokenize("abc"), UnencodableText);
  CHECK_THROWS_AS(m.tokenize("a\xff"), UnencodableText);
}

TEST_CASE("byte fallback covers every byte") {
  const Vocabulary v = Vocabulary::from_json({{"tokens", {"<eot>", "ab"}}, {"eot", 0},
                                              {"byte_fallback", true}});
  CHECK(v.size() == 2 + 256);
  const std::string s = "ab\xe4\xb8\x80";
  CHECK(v.detokenize(v.tokenize(s)) == s);
  CHECK(Vocabulary::from_json(v.to_json()).hash() == v.hash());
}

TEST_CASE("table lookup drives the argmax") {
  const MockBackend m = ab_mock({{"contexts", {{"0", {{"1", 1.0}}}, {"", {{"2", 0.7}}}}}});
  const LogitVector after_a = m.next_token_logits(TokenSeq{0});
  CHECK(std::max_element(after_a.begin(), after_a.end()) - after_a.begin() == 1);
  CHECK(log_softmax_at(after_a, 1) == doctest::Approx(0.0));
  CHECK(std::exp(log_softmax_at(after_a, 0)) == 0.0);

  // Empty prefix uses the start distribution; leftover mass is spread evenly.
  const LogitVector start = m.next_token_logits(TokenSeq{});
  CHECK(std::exp(log_softmax_at(start, 2)) == doctest::Approx(0.7));
  CHECK(std::exp(log_softmax_at(start, 0)) == doctest::Approx(0.1));
}

TEST_CASE("undeclared contexts are uniform") {
  const MockBackend m = ab_mock();
  const LogitVector l = m.next_token_logits(TokenSeq{1});
  for (TokenId t = 0; t < 4; ++t) CHECK(std::exp(log_softmax_at(l, t)) == doctest::Approx(0.25));
}

TEST_CASE("context limit") {
  const MockBackend m = ab_mock();
  CHECK_NOTHROW(m.next_token_logits(TokenSeq{0, 0, 0, 0}));
  CHECK_THROWS_AS(m.next_token_logits(TokenSeq{0, 0, 0, 0, 0}), ContextOverflow);
  CHECK_THROWS_AS(m.score_completion(TokenSeq{0, 0, 0, 0}, TokenSeq{0, 1}), ContextOverflow);
}

TEST_CASE("score_completion sums next-token log-probabilities") {
  const MockBackend det = ab_mock({{"contexts", {{"0", {{"1", 1.0}}}, {"1", {{"0", 1.0}}}}}});
  CHECK(det.score_completion(TokenSeq{0}, TokenSeq{1, 0, 1}) == doctest::Approx(0.0));

  const MockBackend half =
      ab_mock({{"contexts", {{"0", {{"1", 0.5}, {"0", 0.5}}}, {"1", {{"0", 0.5}, {"1", 0.5}}}}}});
  CHECK(half.score_completion(TokenSeq{0}, TokenSeq{1, 0}) == doctest::Approx(std::log(0.25)));

  const MockBackend m = ab_mock({{"contexts", {{"1", {{"2", 0.6}}}}}});
  const LogitVector l = m.next_token_logits(TokenSeq{1});
  CHECK(m.score_completion(TokenSeq{1}, TokenSeq{2}) == log_softmax_at(l, 2));
  CHECK_THROWS_AS(m.score_completion(TokenSeq{1}, TokenSeq{}), BackendError);
}

TEST_CASE("score_completion is additive over splits") {
  const MockBackend m =
      ab_mock({{"contexts", {{"0", {{"1", 0.3}, {"2", 0.3}}}, {"2", {{"0", 0.9}}}}}});
  const TokenSeq prefix{1}, c{0, 2, 0, 1};
  const double whole = m.score_completion(prefix, c);
  TokenSeq p2 = prefix;
  p2.insert(p2.end(), c.begin(), c.begin() + 2);
  const double split = m.score_completion(prefix, TokenSeq(c.begin(), c.begin() + 2)) +
                       m.score_completion(p2, TokenSeq(c.begin() + 2, c.end()));
  CHECK(whole == doctest::Approx(split).epsilon(1e-12));
}

TEST_CASE("softmax normalizes and tolerates large logits") {
  const std::vector<double> l = {1000.0, 1000.0, -1e4, 999.0};
  const auto p = softmax(l);
  double s = 0.0;
  for (double x : p) s += x;
  CHECK(s == doctest::Approx(1.0));
  CHECK(p[0] == doctest::Approx(p[1]));
  CHECK(p[2] == 0.0);
}

TEST_CASE("cues take precedence over contexts") {
  const MockBackend m = ab_mock({{"contexts", {{"0", {{"1", 1.0}}}}},
                                 {"cues", {{{"contains", "bb"}, {"context", {0}},
                                            {"dist", {{"2", 1.0}}}}}}});
  CHECK(log_softmax_at(m.next_token_logits(TokenSeq{1, 1, 0}), 2) == doctest::Approx(0.0));
  CHECK(log_softmax_at(m.next_token_logits(TokenSeq{1, 0}), 1) == doctest::Approx(0.0));
}

TEST_CASE("saliency fixture is passed through verbatim") {
  const json fixture = {{"shape", {2, 1, 2}},
                        {"values", {{{1.0, 2.0}}, {{3.0, 4.0}}}},
                        {"spans", {{{"label", "s0"}, {"start", 0}, {"end", 2}}}},
                        {"answer_cols", {0}}};
  const MockBackend with = ab_mock({{"saliency", fixture}});
  CHECK(with.capabilities().supports_token_saliency);
  const SaliencyMatrix m = with.token_saliency(TokenSeq{0}, TokenSeq{1});
  CHECK(m.values == std::vector<double>{1, 2, 3, 4});
  CHECK(m.to_json() == SaliencyMatrix::from_json(fixture).to_json());

  const MockBackend without = ab_mock();
  CHECK_FALSE(without.capabilities().supports_token_saliency);
  CHECK_THROWS_AS(without.token_saliency(TokenSeq{0}, TokenSeq{1}), CapabilityMissing);
}

TEST_CASE("mock is a pure function of its arguments") {
  const MockBackend m = ab_mock({{"fallback", {{"0", 0.2}}}});
  CHECK(m.next_token_logits(TokenSeq{2, 2}) == m.next_token_logits(TokenSeq{2, 2}));
}

TEST_CASE("context keys") {
  CHECK(parse_context_key("") == TokenSeq{});
  CHECK(parse_context_key("1,22,3") == TokenSeq{1, 22, 3});
  CHECK(context_key(TokenSeq{4, 5}) == "4,5");
}
