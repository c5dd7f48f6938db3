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
#include "cotattr/evalstats.hpp"
#include "support.hpp"

using namespace cotattr;

namespace {

GenerationRecord rec(const std::string& pid, std::optional<std::int64_t> answer, bool compliant,
                     std::size_t tokens = 10, std::size_t steps = 0) {
  GenerationRecord r;
  r.id = "en/CoT-Struct/" + pid;
  r.problem_id = pid;
  r.parsed.answer = answer;
  r.parsed.compliant = compliant;
  r.parsed.steps.assign(steps, "- s.");
  r.output_tokens = tokens;
  return r;
}

std::vector<Problem> problems(std::size_t n) {
  std::vector<Problem> ps;
  for (std::size_t i = 0; i < n; ++i) ps.push_back({"p" + std::to_string(i), "en", "Q", 1});
  return ps;
}

}  // namespace

TEST_CASE("accuracy") {
  const auto ps = problems(4);
  std::vector<GenerationRecord> rs = {rec("p0", 1, true), rec("p1", 1, true), rec("p2", 1, true),
                                      rec("p3", 2, true)};
  for (std::size_t i = 0; i < 4; ++i) rs[i].gold = 1;
  CHECK(accuracy(rs, ps) == 0.75);
  std::vector<GenerationRecord> none = {rec("p0", {}, false), rec("p1", {}, false)};
  CHECK(accuracy(none, ps) == 0.0);
  std::vector<GenerationRecord> stray = {rec("zz", 1, true)};
  CHECK_THROWS_AS(accuracy(stray, ps), StatsError);
  std::vector<GenerationRecord> dup = {rec("p0", 1, true), rec("p0", 1, true)};
  CHECK_THROWS_AS(accuracy(dup, ps), StatsError);
  CHECK(format_percent(0.592) == "59.2%");
}

TEST_CASE("parsed ratio") {
  std::vector<GenerationRecord> rs;
  for (int i = 0; i < 50; ++i) rs.push_back(rec("p", 1, i != 0));
  CHECK(parsed_ratio(rs) == doctest::Approx(0.98));
  CHECK_FALSE(parsed_ratio({}));
  rs.erase(rs.begin());
  CHECK(parsed_ratio(rs) == 1.0);
}

TEST_CASE("mean and standard error") {
  const std::vector<double> a = {2, 4}, b = {5, 5, 5}, c = {7};
  CHECK(mean_se(a).mean == 3.0);
  CHECK(mean_se(a).se == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mean_se(b).se == 0.0);
  CHECK(mean_se(c).se == 0.0);
  CHECK(mean_se(c).single());
  CHECK_THROWS_AS(mean_se({}), StatsError);

  const std::vector<GenerationRecord> rs = {rec("a", 1, true, 2, 1), rec("b", 1, true, 4, 3)};
  const LengthStats l = length_stats(rs);
  CHECK(l.tokens.mean == 3.0);
  CHECK(l.steps.mean == 2.0);
  CHECK(l.steps.se == doctest::Approx(1.0));
  CHECK_THROWS_AS(length_stats({}), StatsError);
}

TEST_CASE("normalized position") {
  CHECK(normalized_position(0, 4) == 0.0);
  CHECK(normalized_position(3, 4) == 1.0);
  CHECK(normalized_position(1, 3) == 0.5);
  CHECK(normalized_position(0, 1) == 1.0);
  CHECK_THROWS_AS(normalized_position(4, 4), StatsError);
}

TEST_CASE("top step category") {
  const std::vector<double> first = {0.9, 0.1, 0.2}, mid = {0.1, 0.9, 0.2}, last = {0.1, 0.2, 0.9};
  CHECK(top_step_category(first) == StepCategory::kFirst);
  CHECK(top_step_category(mid) == StepCategory::kIntermediate);
  CHECK(top_step_category(last) == StepCategory::kFinal);
  const std::vector<double> tie = {0.5, 0.5}, single = {0.3};
  CHECK(top_step_category(tie) == StepCategory::kFinal);
  CHECK(top_step_category(single) == StepCategory::kFinal);
  CHECK(to_string(StepCategory::kIntermediate) == "Intermediate");
}

TEST_CASE("slope fitting") {
  const std::vector<Point> line = {{0, 1}, {0.5, 2}, {1, 3}};
  const SlopeFit f = fit_slope(line);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.n == 3);
  const std::vector<Point> vertical = {{1, 0}, {1, 5}};
  CHECK_THROWS_AS(fit_slope(vertical), StatsError);
  const std::vector<Point> one = {{0, 1}};
  CHECK_THROWS_AS(fit_slope(one), StatsError);
}

TEST_CASE("category histogram and slope table") {
  std::vector<AttributionRow> rows = {
      {"en", true, {0.1, 0.2, 0.9}, {0.1 / 1.2, 0.2 / 1.2, 0.9 / 1.2}},
      {"en", false, {0.9, 0.0, 0.1}, {0.9, 0.0, 0.1}},
      {"fr", true, {0.0, 1.0}, {0.0, 1.0}}};
  const auto h = category_histogram(rows);
  REQUIRE(h.size() == 2);
  CHECK(h[0].language == "en");
  CHECK(h[0].counts == std::array<std::size_t, 3>{1, 0, 1});
  CHECK(h[1].total() == 1);

  const auto s = slope_table(rows);
  REQUIRE(s.size() == 4);
  CHECK(s[0].language == "en");
  CHECK(s[0].scale == "raw");
  REQUIRE(s[0].correct);
  CHECK(s[0].correct->slope == doctest::Approx(0.8));
  CHECK(s[0].incorrect->slope == doctest::Approx(-0.8));
  CHECK(s[1].language == "fr");
  CHECK_FALSE(s[1].incorrect);
  CHECK(s[2].scale == "normalized");
}

TEST_CASE("summaries and report files") {
  const auto ps = problems(2);
  std::vector<GenerationRecord> rs = {rec("p0", 1, true, 5, 2), rec("p1", 3, false, 7, 0)};
  for (auto& r : rs) r.gold = 1;
  const RunSummary cot = summarize("en", SetupId::kCotStruct, rs, ps);
  CHECK(cot.accuracy == 0.5);
  CHECK(cot.parsed_ratio == 0.5);
  CHECK(cot.correct == 1);
  const RunSummary free = summarize("en", SetupId::kCotUnstruct, rs, ps);
  CHECK_FALSE(free.parsed_ratio);

  const auto dir = testing::temp_dir("report");
  Report report{{cot, free}, {}, {}};
  emit_report(report, dir);
  const std::string acc = testing::slurp(dir / "accuracy.csv");
  CHECK(acc.rfind("language,setup,n,correct,accuracy,accuracy_pct\n", 0) == 0);
  CHECK(acc.find("en,CoT-Struct,2,1,0.5,50.0%\n") != std::string::npos);
  CHECK(testing::slurp(dir / "compliance.csv").find("en,CoT-Unstruct,2,1,\n") != std::string::npos);
  for (const char* f : {"lengths.csv", "categories.csv", "slopes.csv", "plots/accuracy.svg"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  const std::string first = testing::slurp(dir / "lengths.csv");
  emit_report(report, dir);
  CHECK(testing::slurp(dir / "lengths.csv") == first);
  std::filesystem::remove_all(dir);
}
