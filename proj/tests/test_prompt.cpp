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

#include <fstream>

#include "cotattr/errors.hpp"
#include "cotattr/grammar.hpp"
#include "cotattr/prompt.hpp"
#include "cotattr/record.hpp"
#include "support.hpp"

using namespace cotattr;

namespace {

const std::string kRoger =
    "Roger has 5 tennis balls. He buys 2 more cans of tennis balls. Each can has 3 tennis "
    "balls. How many tennis balls does he have now?";

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

void write(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

}  // namespace

TEST_CASE("dataset loading") {
  const auto dir = testing::temp_dir("dataset");
  write(dir / "a.tsv", "Q one?\t3\nQ two?\t1,234\n");
  const auto tsv = load_dataset(dir / "a.tsv", "en");
  REQUIRE(tsv.size() == 2);
  CHECK(tsv[0].id == "en-0");
  CHECK(tsv[1].gold == 1234);

  write(dir / "b.jsonl", "{\"id\": \"x\", \"question\": \"Q?\", \"answer\": 7}\n"
                         "{\"question\": \"R?\", \"answer\": \"8\"}\n");
  const auto jl = load_dataset(dir / "b.jsonl", "fr");
  REQUIRE(jl.size() == 2);
  CHECK(jl[0].id == "x");
  CHECK(jl[1].id == "fr-1");
  CHECK(jl[1].language == "fr");

  write(dir / "empty.tsv", "");
  CHECK(load_dataset(dir / "empty.tsv", "en").empty());

  write(dir / "bad.tsv", "Q?\t11\xc2\xbd\n");
  CHECK_THROWS_AS(load_dataset(dir / "bad.tsv", "en"), DataError);
  write(dir / "bad2.tsv", "no tab here\n");
  CHECK_THROWS_AS(load_dataset(dir / "bad2.tsv", "en"), DataError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("gold answers") {
  CHECK(parse_gold_answer("42") == 42);
  CHECK(parse_gold_answer("12,000") == 12000);
  CHECK_FALSE(parse_gold_answer("4.5"));
  CHECK_FALSE(parse_gold_answer("1,23"));
  CHECK_FALSE(parse_gold_answer(""));
}

TEST_CASE("prompt construction per setup") {
  const LanguageConfig en = LanguageConfig::english();
  const Problem p{"p", "en", kRoger, 11};
  CHECK(build_prompt(p, SetupId::kNoCotUnstruct, en).text == kRoger);
  CHECK(build_prompt(p, SetupId::kNoCotStruct, en).text == kRoger + "\n");

  const PromptBundle cot = build_prompt(p, SetupId::kCotStruct, en);
  CHECK(count(cot.text, "Step-by-Step Answer:\n") == 8);
  CHECK(count(cot.text, "\n\n") == 8);
  const std::string tail = cot.text.substr(cot.text.rfind("\n\n") + 2);
  CHECK(tail == kRoger + "\n");
  CHECK(build_prompt(p, SetupId::kCotStruct, en).text == cot.text);
  CHECK(build_prompt(p, SetupId::kCotUnstruct, en).text == cot.text);

  LanguageConfig few = en;
  few.exemplars.resize(3);
  CHECK_THROWS_AS(build_prompt(p, SetupId::kCotStruct, few), DataError);
  CHECK_NOTHROW(build_prompt(p, SetupId::kNoCotStruct, few));
}

TEST_CASE("exemplar rendering") {
  const Exemplar ex{"Q?", {"a.", "b."}, 3};
  CHECK(render_exemplar(ex, LanguageConfig::english()) ==
        "Q?\nStep-by-Step Answer:\n- a.\n- b.\nThe answer is 3.\n\n");
}

TEST_CASE("structured parse") {
  const LanguageConfig en = LanguageConfig::english();
  const auto r = parse_structured(
      "Step-by-Step Answer:\n- Roger starts with 5 balls.\n- 2 cans of 3 is 6.\n- 5 + 6 = 11.\n"
      "The answer is 11.",
      en);
  CHECK(r.compliant);
  CHECK(r.steps.size() == 3);
  CHECK(r.steps[0] == "- Roger starts with 5 balls.");
  CHECK(r.answer == 11);
  CHECK(r.answer_lead == "The answer is ");
  CHECK(r.terminator == ".");

  const auto one = parse_structured("Step-by-Step Answer:\n- x.\nThe answer is 1.", en);
  CHECK(one.steps.size() == 1);

  const auto bad = parse_structured(
      "Step-by-Step Answer:\n- 200 + 60 = 260.\nThe answer is 260.\n- So 260 remain.\n", en);
  CHECK_FALSE(bad.compliant);
  CHECK(bad.steps.empty());
  CHECK_FALSE(bad.answer);
}

TEST_CASE("parsed responses rejoin into compliant text") {
  const LanguageConfig en = LanguageConfig::english();
  const Dfa dfa = compile({TemplateId::kCot}, en);
  for (std::size_t n = 1; n <= 8; ++n) {
    const std::string text = testing::cot_text(n, std::to_string(10 * n));
    const auto parsed = parse_structured(text, en, dfa);
    REQUIRE(parsed.compliant);
    CHECK(join_structured(parsed) == text);
    CHECK(check_compliance(join_structured(parsed), dfa));
  }
}

TEST_CASE("answer-only and unstructured parses") {
  const LanguageConfig en = LanguageConfig::english();
  const Dfa ao = compile({TemplateId::kAnswerOnly}, en);
  const auto a = parse_answer_only("The answer is 42.", en, ao);
  CHECK(a.compliant);
  CHECK(a.answer == 42);
  CHECK(a.steps.empty());

  const auto u = parse_unstructured("- first 3\nthen\n- second 4\nso 9 total");
  CHECK_FALSE(u.compliant);
  CHECK(u.steps.size() == 2);
  CHECK(u.answer == 9);
}

TEST_CASE("last number extraction") {
  CHECK(extract_last_number("so 5 + 6 = 11") == 11);
  CHECK_FALSE(extract_last_number("no numbers here"));
  CHECK(extract_last_number("the answer is 12, not 9") == 9);
  const auto span = find_last_number("ab 123.");
  REQUIRE(span);
  CHECK(span->begin == 3);
  CHECK(span->end == 6);
}

TEST_CASE("setup names and flags") {
  for (SetupId s : {SetupId::kNoCotUnstruct, SetupId::kCotUnstruct, SetupId::kNoCotStruct,
                    SetupId::kCotStruct}) {
    CHECK(setup_from_string(to_string(s)) == s);
  }
  CHECK(to_string(SetupId::kCotStruct) == "CoT-Struct");
  CHECK(uses_grammar(SetupId::kNoCotStruct));
  CHECK_FALSE(uses_cot(SetupId::kNoCotStruct));
  CHECK(default_template(SetupId::kCotUnstruct) == TemplateId::kNone);
}

TEST_CASE("language config round trip and validation") {
  const LanguageConfig en = LanguageConfig::english();
  CHECK(en.exemplars.size() == 8);
  const LanguageConfig back = LanguageConfig::from_json(en.to_json());
  CHECK(back.to_json() == en.to_json());
  LanguageConfig bad = en;
  bad.terminators = {".."};
  CHECK_THROWS_AS(bad.validate(), DataError);
  const auto file = LanguageConfig::load(std::filesystem::path(COTATTR_SOURCE_DIR) / "data" /
                                         "lang" / "en.json");
  CHECK(file.to_json() == en.to_json());
}

TEST_CASE("generation record round trip") {
  GenerationRecord r = testing::make_record(2, "11");
  r.gold = 11;
  r.error = "boom";
  r.seed = 99;
  const GenerationRecord back = GenerationRecord::from_json(r.to_json());
  CHECK(back.to_json() == r.to_json());
  CHECK(back.correct());
  CHECK(back.compliant());
  CHECK(make_record_id("en", SetupId::kCotStruct, "p1") == "en/CoT-Struct/p1");
}
