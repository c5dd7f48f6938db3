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

#include "cotattr/prompt.hpp"

#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "cotattr/errors.hpp"

namespace cotattr {

using nlohmann::json;

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::int64_t saturating_parse(std::string_view digits) {
  constexpr auto kMax = std::numeric_limits<std::int64_t>::max();
  std::int64_t v = 0;
  for (char c : digits) {
    const int d = c - '0';
    if (v > (kMax - d) / 10) return kMax;
    v = v * 10 + d;
  }
  return v;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (true) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

}  // namespace

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

std::optional<std::int64_t> parse_gold_answer(std::string_view text) {
  const std::string s = trim(text);
  if (s.empty()) return std::nullopt;
  // Either plain digits or groups of three separated by commas.
  bool has_comma = s.find(',') != std::string::npos;
  std::string digits;
  if (!has_comma) {
    for (char c : s) {
      if (!is_digit(c)) return std::nullopt;
    }
    digits = s;
  } else {
    std::size_t group = 0;
    bool first_group = true;
    for (char c : s) {
      if (c == ',') {
        if ((first_group && (group == 0 || group > 3)) || (!first_group && group != 3)) {
          return std::nullopt;
        }
        first_group = false;
        group = 0;
      } else if (is_digit(c)) {
        digits.push_back(c);
        ++group;
      } else {
        return std::nullopt;
      }
    }
    if (group != 3) return std::nullopt;
  }
  if (digits.size() > 18) return std::nullopt;
  return saturating_parse(digits);
}

std::vector<Problem> load_dataset(const std::filesystem::path& path,
                                  const std::string& language) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset " + path.string());
  const auto ext = path.extension().string();
  const bool jsonl = ext == ".jsonl" || ext == ".json";

  std::vector<Problem> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    Problem p;
    p.language = language;
    p.id = language + "-" + std::to_string(out.size());
    if (jsonl) {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception& e) {
        throw DataError(where + ": malformed row: " + e.what());
      }
      if (!j.is_object() || !j.contains("question") || !j["question"].is_string() ||
          !j.contains("answer")) {
        throw DataError(where + ": malformed row: needs question and answer");
      }
      p.question = j["question"].get<std::string>();
      const auto& a = j["answer"];
      std::optional<std::int64_t> gold;
      if (a.is_number_unsigned()) {
        gold = a.get<std::int64_t>();
      } else if (a.is_string()) {
        gold = parse_gold_answer(a.get<std::string>());
      }
      if (!gold) throw DataError(where + ": malformed row: gold answer is not an integer");
      p.gold = *gold;
      if (j.contains("id")) {
        p.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
      }
    } else {
      const std::size_t tab = line.rfind('\t');
      if (tab == std::string::npos) throw DataError(where + ": malformed row: missing tab");
      p.question = line.substr(0, tab);
      auto gold = parse_gold_answer(std::string_view(line).substr(tab + 1));
      if (!gold) throw DataError(where + ": malformed row: gold answer is not an integer");
      p.gold = *gold;
    }
    if (trim(p.question).empty()) throw DataError(where + ": malformed row: empty question");
    out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Setups and prompts
// ---------------------------------------------------------------------------

std::string to_string(SetupId s) {
  switch (s) {
    case SetupId::kNoCotUnstruct: return "NoCoT-Unstruct";
    case SetupId::kCotUnstruct: return "CoT-Unstruct";
    case SetupId::kNoCotStruct: return "NoCoT-Struct";
    case SetupId::kCotStruct: return "CoT-Struct";
  }
  return "NoCoT-Unstruct";
}

SetupId setup_from_string(std::string_view name) {
  if (name == "NoCoT-Unstruct") return SetupId::kNoCotUnstruct;
  if (name == "CoT-Unstruct") return SetupId::kCotUnstruct;
  if (name == "NoCoT-Struct") return SetupId::kNoCotStruct;
  if (name == "CoT-Struct") return SetupId::kCotStruct;
  throw DataError("unknown setup '" + std::string(name) + "'");
}

bool uses_cot(SetupId s) { return s == SetupId::kCotUnstruct || s == SetupId::kCotStruct; }

bool uses_grammar(SetupId s) { return s == SetupId::kNoCotStruct || s == SetupId::kCotStruct; }

TemplateId default_template(SetupId s) {
  switch (s) {
    case SetupId::kCotStruct: return TemplateId::kCot;
    case SetupId::kNoCotStruct: return TemplateId::kAnswerOnly;
    default: return TemplateId::kNone;
  }
}

std::string render_exemplar(const Exemplar& ex, const LanguageConfig& lang) {
  std::string out = ex.question + "\n" + lang.preamble + "\n";
  for (const auto& step : ex.steps) out += "- " + step + "\n";
  out += lang.answer_phrase + " " + std::to_string(ex.answer) + lang.primary_terminator() + "\n\n";
  return out;
}

PromptBundle build_prompt(const Problem& problem, SetupId setup, const LanguageConfig& lang) {
  PromptBundle b;
  b.setup = setup;
  b.language = lang.code;
  if (uses_cot(setup)) {
    if (lang.exemplars.size() < 8) {
      throw DataError("language '" + lang.code + "' has " +
                      std::to_string(lang.exemplars.size()) +
                      " exemplars; CoT setups need 8");
    }
    for (std::size_t i = 0; i < 8; ++i) b.text += render_exemplar(lang.exemplars[i], lang);
    b.text += problem.question + "\n";
  } else if (setup == SetupId::kNoCotStruct) {
    // The grammar supplies the answer phrase; the prompt only breaks the line.
    b.text = problem.question + "\n";
  } else {
    b.text = problem.question;
  }
  return b;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

std::optional<NumberSpan> find_last_number(std::string_view text) {
  std::size_t end = text.size();
  while (end > 0 && !is_digit(text[end - 1])) --end;
  if (end == 0) return std::nullopt;
  std::size_t begin = end;
  while (begin > 0 && is_digit(text[begin - 1])) --begin;
  return NumberSpan{begin, end, saturating_parse(text.substr(begin, end - begin))};
}

std::optional<std::int64_t> extract_last_number(std::string_view text) {
  auto span = find_last_number(text);
  if (!span) return std::nullopt;
  return span->value;
}

ParsedResponse parse_structured(std::string_view text, const LanguageConfig&,
                                const Dfa& cot_dfa) {
  ParsedResponse r;
  if (!check_compliance(text, cot_dfa)) return r;
  const auto lines = split_lines(text);
  r.preamble = std::string(lines[0]);
  std::size_t offset = lines[0].size() + 1;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty() || lines[i][0] != '-') break;
    // The final line always belongs to the answer.
    if (offset + lines[i].size() >= text.size()) break;
    r.steps.emplace_back(lines[i]);
    offset += lines[i].size() + 1;
  }
  const std::string_view tail = text.substr(offset);
  auto num = find_last_number(tail);
  if (!num) return ParsedResponse{};
  r.answer_lead = std::string(tail.substr(0, num->begin));
  r.answer_text = std::string(tail.substr(num->begin, num->end - num->begin));
  r.terminator = std::string(tail.substr(num->end));
  r.answer = num->value;
  r.compliant = true;
  return r;
}

ParsedResponse parse_structured(std::string_view text, const LanguageConfig& lang) {
  const Dfa dfa = compile(GrammarTemplate{TemplateId::kCot}, lang);
  return parse_structured(text, lang, dfa);
}

ParsedResponse parse_answer_only(std::string_view text, const LanguageConfig&,
                                 const Dfa& answer_dfa) {
  ParsedResponse r;
  if (!check_compliance(text, answer_dfa)) return r;
  auto num = find_last_number(text);
  if (!num) return r;
  r.answer_lead = std::string(text.substr(0, num->begin));
  r.answer_text = std::string(text.substr(num->begin, num->end - num->begin));
  r.terminator = std::string(text.substr(num->end));
  r.answer = num->value;
  r.compliant = true;
  return r;
}

ParsedResponse parse_unstructured(std::string_view text) {
  ParsedResponse r;
  for (auto line : split_lines(text)) {
    const std::string t = trim(line);
    if (!t.empty() && t[0] == '-') r.steps.push_back(t);
  }
  r.answer = extract_last_number(text);
  if (auto num = find_last_number(text)) {
    r.answer_text = std::string(text.substr(num->begin, num->end - num->begin));
  }
  return r;
}

std::string join_structured(const ParsedResponse& parsed) {
  std::string out = parsed.preamble + "\n";
  for (const auto& s : parsed.steps) out += s + "\n";
  out += parsed.answer_lead + parsed.answer_text + parsed.terminator;
  return out;
}

}  // namespace cotattr
