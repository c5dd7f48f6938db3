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

#include "cotattr/errors.hpp"
#include "cotattr/saliency.hpp"
#include "support.hpp"

using namespace cotattr;
using nlohmann::json;

namespace {

SaliencyMatrix matrix(std::size_t i, std::size_t o, std::size_t d, std::vector<double> v) {
  SaliencyMatrix m;
  m.inputs = i;
  m.outputs = o;
  m.width = d;
  m.values = std::move(v);
  return m;
}

ScoreGrid column(std::vector<double> v) {
  ScoreGrid g(v.size(), 1);
  g.values = std::move(v);
  return g;
}

StepImportanceTable table(std::string id, std::vector<double> values, bool correct, double p) {
  StepImportanceTable t;
  t.generation_id = std::move(id);
  t.answer_cols = {0, 1};
  t.values = std::move(values);
  for (std::size_t r = 0; r < t.values.size() / 2; ++r) t.row_labels.push_back("s" + std::to_string(r));
  t.correct = correct;
  t.matches_gold = correct;
  t.answer_probability = p;
  return t;
}

}  // namespace

TEST_CASE("collapse sums the embedding axis") {
  CHECK(collapse_embedding(matrix(1, 1, 3, {1, 2, 3})).values == std::vector<double>{6});
  CHECK(collapse_embedding(matrix(2, 1, 2, {1, 2, 3, 4})).values == std::vector<double>{3, 7});
  CHECK(collapse_embedding(matrix(2, 2, 1, {0, 0, 0, 0})).values == std::vector<double>(4, 0.0));
  CHECK_THROWS_AS(collapse_embedding(matrix(2, 1, 2, {1, 2, 3})), DataError);
}

TEST_CASE("column normalization") {
  const auto a = normalize_columns(column({3, 4}));
  CHECK(a.grid.values == std::vector<double>{0.6, 0.8});
  CHECK(a.zero_column == std::vector<bool>{false});
  CHECK(normalize_columns(column({5})).grid.values == std::vector<double>{1.0});
  const auto z = normalize_columns(column({0, 0}));
  CHECK(z.grid.values == std::vector<double>{0, 0});
  CHECK(z.zero_column == std::vector<bool>{true});
}

TEST_CASE("step aggregation") {
  ScoreGrid g(4, 2);
  g.values = {0.2, 1.0, 0.4, 2.0, 0.9, 3.0, 0.5, 4.0};
  const std::vector<LabeledSpan> spans = {{"s0", 0, 2}, {"s1", 2, 3}};
  const std::vector<std::size_t> cols = {0};
  const auto t = aggregate_steps(g, spans, cols);
  CHECK(t.at(0, 0) == doctest::Approx(0.3));
  CHECK(t.at(1, 0) == 0.9);
  CHECK(t.row_labels == std::vector<std::string>{"s0", "s1"});

  // Rows only see their own positions.
  ScoreGrid g2 = g;
  g2(3, 0) = 100.0;
  g2(0, 1) = -7.0;
  CHECK(aggregate_steps(g2, spans, cols).values == t.values);

  const std::vector<LabeledSpan> overlap = {{"a", 0, 2}, {"b", 1, 3}};
  CHECK_THROWS_AS(aggregate_steps(g, overlap, cols), DataError);
  const std::vector<LabeledSpan> empty = {{"a", 2, 2}};
  CHECK_THROWS_AS(aggregate_steps(g, empty, cols), DataError);
  const std::vector<LabeledSpan> outside = {{"a", 3, 5}};
  CHECK_THROWS_AS(aggregate_steps(g, outside, cols), DataError);
  const std::vector<std::size_t> bad_col = {2};
  CHECK_THROWS_AS(aggregate_steps(g, spans, bad_col), DataError);
}

TEST_CASE("aggregation does not depend on embedding width") {
  // Same collapsed sums from width 1 and width 3.
  SaliencyMatrix narrow = matrix(3, 1, 1, {3, 0, 4});
  SaliencyMatrix wide = matrix(3, 1, 3, {1, 1, 1, -1, 0, 1, 2, 2, 0});
  for (auto* m : {&narrow, &wide}) {
    m->spans = {{"a", 0, 1}, {"b", 1, 3}};
    m->answer_cols = {0};
  }
  CHECK(step_importance(narrow).values == step_importance(wide).values);
  CHECK(step_importance(narrow).row_score(1) == doctest::Approx(0.4));
}

TEST_CASE("heatmap CSV, sidecar and SVG") {
  const auto dir = testing::temp_dir("heatmap");
  const std::vector<StepImportanceTable> tables = {
      table("de-6", {0.1, 0.3, 0.5, 0.7}, true, 0.994),
      table("de-7", {0.2, 0.2, 0.4, 0.6, 0.9, 0.9}, false, 0.5)};
  emit_heatmap(tables, dir / "heat.csv");
  CHECK(testing::slurp(dir / "heat.csv") == "step,de-6,de-7\n0,0.2,0.2\n1,0.6,0.5\n2,,0.9\n");
  const json side = json::parse(testing::slurp(dir / "heat.json"));
  REQUIRE(side["generations"].size() == 2);
  CHECK(side["generations"][0]["answer_probability"].get<double>() == 0.994);
  CHECK(side["generations"][0]["correct"] == true);
  CHECK(side["generations"][1]["correct"] == false);
  CHECK(std::filesystem::exists(dir / "heat.svg"));

  emit_heatmap(std::span(tables).first(1), dir / "small.csv", false);
  CHECK(testing::slurp(dir / "small.csv") == "step,de-6\n0,0.2\n1,0.6\n");
  CHECK_FALSE(std::filesystem::exists(dir / "small.svg"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("answer token indices") {
  const Vocabulary v = testing::char_vocab({"is 1", "23", "."});
  const TokenSeq gen = v.tokenize("It is 123.");
  const auto idx = answer_token_indices(v, gen);
  // "It", " ", "is 1", "23", "." -> tokens 3 and 4 of the segmentation hold digits.
  std::string joined;
  for (std::size_t i : idx) joined += v.surface(gen[i]);
  CHECK(joined == "is 123");
}

TEST_CASE("fixture JSON round trip") {
  SaliencyMatrix m = matrix(2, 1, 2, {1, 2, 3, 4});
  m.spans = {{"s", 0, 2}};
  m.answer_cols = {0};
  const SaliencyMatrix back = SaliencyMatrix::from_json(m.to_json());
  CHECK(back.values == m.values);
  CHECK(back.spans.size() == 1);
  json broken = m.to_json();
  broken["shape"] = {3, 1, 2};
  CHECK_THROWS_AS(SaliencyMatrix::from_json(broken), DataError);
}
