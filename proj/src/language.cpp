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

#include "cotattr/language.hpp"

#include <fstream>

#include "cotattr/errors.hpp"
#include "cotattr/utf8.hpp"

namespace cotattr {

using nlohmann::json;

namespace {

void check_phrase(const std::string& phrase, const char* what) {
  if (phrase.empty()) throw DataError(std::string("language config: empty ") + what);
  if (phrase.find('\n') != std::string::npos || phrase.find('\r') != std::string::npos) {
    throw DataError(std::string("language config: newline in ") + what);
  }
  if (!utf8::valid(phrase)) throw DataError(std::string("language config: invalid UTF-8 in ") + what);
}

}  // namespace

void LanguageConfig::validate() const {
  if (code.empty()) throw DataError("language config: empty code");
  check_phrase(preamble, "preamble");
  check_phrase(answer_phrase, "answer phrase");
  if (terminators.empty()) throw DataError("language config: no terminators");
  for (const auto& t : terminators) {
    auto decoded = utf8::decode(t);
    if (!decoded || decoded->size() != 1 || (*decoded)[0] == U'\n') {
      throw DataError("language config: terminator '" + t +
                      "' must be one non-newline character");
    }
  }
  for (const auto& ex : exemplars) {
    if (ex.question.empty()) throw DataError("language config: exemplar without question");
    if (ex.steps.empty() || ex.steps.size() > 8) {
      throw DataError("language config: exemplar needs 1-8 steps");
    }
    for (const auto& s : ex.steps) check_phrase(s, "exemplar step");
    if (ex.answer < 0) throw DataError("language config: negative exemplar answer");
  }
}

LanguageConfig LanguageConfig::from_json(const json& j) {
  LanguageConfig cfg;
  try {
    cfg.code = j.at("code").get<std::string>();
    cfg.preamble = j.at("preamble").get<std::string>();
    cfg.answer_phrase = j.at("answer_phrase").get<std::string>();
    cfg.terminators = j.contains("terminators")
                          ? j["terminators"].get<std::vector<std::string>>()
                          : default_terminators();
    if (j.contains("exemplars")) {
      for (const auto& e : j["exemplars"]) {
        cfg.exemplars.push_back({e.at("question").get<std::string>(),
                                 e.at("steps").get<std::vector<std::string>>(),
                                 e.at("answer").get<std::int64_t>()});
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("language config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

LanguageConfig LanguageConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open language config " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw DataError("language config " + path.string() + ": " + e.what());
  }
}

json LanguageConfig::to_json() const {
  json ex = json::array();
  for (const auto& e : exemplars) {
    ex.push_back({{"question", e.question}, {"steps", e.steps}, {"answer", e.answer}});
  }
  return {{"code", code},
          {"preamble", preamble},
          {"answer_phrase", answer_phrase},
          {"terminators", terminators},
          {"exemplars", ex}};
}

LanguageConfig LanguageConfig::english() {
  LanguageConfig cfg;
  cfg.code = "en";
  cfg.preamble = "Step-by-Step Answer:";
  cfg.answer_phrase = "The answer is";
  cfg.terminators = default_terminators();
  cfg.exemplars = {
      {"Roger has 5 tennis balls. He buys 2 more cans of tennis balls. Each can has 3 "
       "tennis balls. How many tennis balls does he have now?",
       {"Roger started with 5 balls.", "2 cans of 3 tennis balls each is 6 tennis balls.",
        "5 + 6 = 11."},
       11},
      {"There were nine computers in the server room. Five more computers were installed "
       "each day, from monday to thursday. How many computers are now in the server room?",
       {"There are 4 days from monday to thursday.", "5 computers were added each day.",
        "That means in total 4 * 5 = 20 computers were added.",
        "There were 9 computers in the beginning, so now there are 9 + 20 = 29 computers."},
       29},
      {"Leah had 32 chocolates and her sister had 42. If they ate 35, how many pieces do "
       "they have left in total?",
       {"Leah had 32 chocolates and Leah's sister had 42.",
        "That means there were originally 32 + 42 = 74 chocolates.", "35 have been eaten.",
        "So in total they still have 74 - 35 = 39 chocolates."},
       39},
      {"Shawn has five toys. For Christmas, he got two toys each from his mom and dad. How "
       "many toys does he have now?",
       {"He has 5 toys.", "He got 2 from mom, so after that he has 5 + 2 = 7 toys.",
        "Then he got 2 more from dad, so in total he has 7 + 2 = 9 toys."},
       9},
      {"Michael had 58 golf balls. On tuesday, he lost 23 golf balls. On wednesday, he lost "
       "2 more. How many golf balls did he have at the end of wednesday?",
       {"Michael started with 58 golf balls and lost 23, so he has 58 - 23 = 35.",
        "After he lost 2 more, he has 35 - 2 = 33 balls now."},
       33},
      {"There are 15 trees in the grove. Grove workers will plant trees in the grove today. "
       "After they are done, there will be 21 trees. How many trees did the grove workers "
       "plant today?",
       {"We start with 15 trees.", "Later we have 21 trees.",
        "The difference must be the number of trees they planted.",
        "So, they must have planted 21 - 15 = 6 trees."},
       6},
      {"Jason had 20 lollipops. He gave Denny some lollipops. Now Jason has 12 lollipops. "
       "How many lollipops did Jason give to Denny?",
       {"Jason had 20 lollipops.",
        "Since he only has 12 now, he must have given the rest to Denny.",
        "The number of lollipops he has given to Denny must have been 20 - 12 = 8 "
        "lollipops."},
       8},
      {"Olivia has $23. She bought five bagels for $3 each. How much money does she have "
       "left?",
       {"She bought 5 bagels for $3 each.", "This means she spent 5 * $3 = $15 on the bagels.",
        "She had $23 in beginning, so now she has $23 - $15 = $8."},
       8},
  };
  return cfg;
}

}  // namespace cotattr
