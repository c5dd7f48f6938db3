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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cotattr/dfa.hpp"
#include "cotattr/grammar.hpp"
#include "cotattr/language.hpp"

namespace cotattr {

struct Problem {
  std::string id;
  std::string language;
  std::string question;
  std::int64_t gold = 0;
};

// Reads TSV (question<TAB>answer) or JSON-Lines ({"question", "answer"[, "id"]}).
// The format is chosen by extension (.jsonl/.json vs anything else). Ids
// default to "<language>-<row index>". Gold answers accept plain digits and
// comma thousand separators; anything else is a malformed row (DataError).
std::vector<Problem> load_dataset(const std::filesystem::path& path,
                                  const std::string& language);

// Strict gold-answer parse shared by both formats.
std::optional<std::int64_t> parse_gold_answer(std::string_view text);

enum class SetupId { kNoCotUnstruct, kCotUnstruct, kNoCotStruct, kCotStruct };

std::string to_string(SetupId s);
SetupId setup_from_string(std::string_view name);
bool uses_cot(SetupId s);
bool uses_grammar(SetupId s);
// Grammar implied by the setup: kCot, kAnswerOnly, or kNone.
TemplateId default_template(SetupId s);

struct PromptBundle {
  SetupId setup = SetupId::kNoCotUnstruct;
  std::string language;
  std::string text;
  std::size_t token_count = 0;
};

// Renders one exemplar block: question, preamble, "- " step lines, answer
// line, blank separator line.
std::string render_exemplar(const Exemplar& ex, const LanguageConfig& lang);

// NoCoT-Unstruct: the question alone. NoCoT-Struct: the question and a line
// break, after which the grammar forces the answer line. CoT setups: the eight exemplars in
// configuration order, then the question on the last line. Throws DataError
// when a CoT setup lacks eight exemplars. token_count is left at zero; the
// caller fills it with its tokenizer.
PromptBundle build_prompt(const Problem& problem, SetupId setup, const LanguageConfig& lang);

struct ParsedResponse {
  std::string preamble;
  // Raw step lines including the leading hyphen, without the newline.
  std::vector<std::string> steps;
  // Text between the last step line and the answer digits: the answer
  // phrase plus the whitespace that followed it.
  std::string answer_lead;
  std::string answer_text;
  std::string terminator;
  std::optional<std::int64_t> answer;
  bool compliant = false;
};

// Structured CoT parse. Non-compliant text yields compliant=false, no steps
// and no answer.
ParsedResponse parse_structured(std::string_view text, const LanguageConfig& lang,
                                const Dfa& cot_dfa);
ParsedResponse parse_structured(std::string_view text, const LanguageConfig& lang);

// Answer-only parse for NoCoT-Struct output.
ParsedResponse parse_answer_only(std::string_view text, const LanguageConfig& lang,
                                 const Dfa& answer_dfa);

// Best-effort recovery for unconstrained output: lines starting with '-' are
// steps, the answer is the last number. Always non-compliant.
ParsedResponse parse_unstructured(std::string_view text);

// Byte span and value of the rightmost maximal run of ASCII digits.
struct NumberSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::int64_t value = 0;
};
std::optional<NumberSpan> find_last_number(std::string_view text);
std::optional<std::int64_t> extract_last_number(std::string_view text);

// Rebuilds a CoT response from parsed pieces.
std::string join_structured(const ParsedResponse& parsed);

}  // namespace cotattr
