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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cotattr/backend.hpp"
#include "cotattr/dfa.hpp"
#include "cotattr/language.hpp"

namespace cotattr {

enum class TemplateId { kCot, kAnswerOnly, kNone };

std::string to_string(TemplateId id);
TemplateId template_from_string(std::string_view name);

// Output shapes the decoder can enforce.
//   kCot:        <preamble>\n, 1-8 lines "-<text><term>\n", <answer phrase>,
//                whitespace, digits, one terminator.
//   kAnswerOnly: <answer phrase>, whitespace, digits, one terminator.
//   kNone:       any text.
// End-of-text is accepted right after the final terminator; trailing
// whitespace is rejected.
struct GrammarTemplate {
  TemplateId id = TemplateId::kCot;
  int min_steps = 1;
  int max_steps = 8;

  // Instantiated regex for the language. Phrases are escaped literally.
  std::string pattern(const LanguageConfig& lang) const;
};

// Escapes every regex metacharacter in `text`.
std::string regex_escape(std::string_view text);

// Throws GrammarError for phrases that are empty or contain newlines.
Dfa compile(const GrammarTemplate& tmpl, const LanguageConfig& lang);

// Full-string acceptance of `text`; invalid UTF-8 never complies.
bool check_compliance(std::string_view text, const Dfa& dfa);

// For every DFA state, the tokens whose whole surface can be consumed
// without leaving the live region, with the state reached. End-of-text is
// allowed exactly in accepting states and leaves the state unchanged.
// Special tokens other than end-of-text and surfaces that are not valid
// UTF-8 are never allowed.
class TokenMaskIndex {
 public:
  using State = Dfa::State;

  static TokenMaskIndex build(Dfa dfa, const Vocabulary& vocab);

  const Dfa& dfa() const { return *dfa_; }
  std::size_t vocab_size() const { return vocab_size_; }
  TokenId eot() const { return eot_; }

  bool allowed(State s, TokenId t) const;
  // Dfa::kDead when not allowed.
  State next(State s, TokenId t) const;
  // Sorted ids, end-of-text included when `s` accepts.
  std::vector<TokenId> allowed_tokens(State s) const;
  std::size_t allowed_count(State s) const;

  nlohmann::json to_json() const;
  static TokenMaskIndex from_json(const nlohmann::json& j);

 private:
  struct Row {
    std::vector<std::uint64_t> bits;
    std::vector<TokenId> tokens;  // sorted, excludes end-of-text
    std::vector<State> targets;   // parallel to tokens
  };

  std::shared_ptr<const Dfa> dfa_;
  std::size_t vocab_size_ = 0;
  TokenId eot_ = 0;
  std::vector<Row> rows_;
};

// On-disk cache of a compiled grammar plus its mask index.
struct GrammarCacheKey {
  std::string template_id;
  std::string language;
  std::uint64_t vocab_hash = 0;

  std::string file_name() const;
};

void save_grammar_cache(const std::filesystem::path& path, const GrammarCacheKey& key,
                        const TokenMaskIndex& index);
// nullopt when the file is missing, unreadable, or keyed differently.
std::optional<TokenMaskIndex> load_grammar_cache(const std::filesystem::path& path,
                                                 const GrammarCacheKey& key);

// Compiles (or loads from `cache_dir` when given) the mask index for a
// template, language and vocabulary.
TokenMaskIndex build_grammar(const GrammarTemplate& tmpl, const LanguageConfig& lang,
                             const Vocabulary& vocab,
                             const std::optional<std::filesystem::path>& cache_dir = {});

struct DecodeBudget {
  std::size_t max_new_tokens = 256;
};

struct DecodeMode {
  bool sample = false;
  std::uint64_t seed = 0;

  static DecodeMode greedy() { return {}; }
  static DecodeMode sampled(std::uint64_t seed) { return {true, seed}; }
};

enum class FinishReason { kAccepted, kBudgetExhausted, kDeadEnd };
std::string to_string(FinishReason r);
FinishReason finish_reason_from_string(std::string_view s);

struct Generation {
  TokenSeq tokens;  // excludes the end-of-text token
  std::string text;
  FinishReason finish = FinishReason::kBudgetExhausted;
};

// Decodes token by token. Disallowed tokens get -inf before selection;
// greedy picks the highest logit (lowest id on ties), sampling draws from
// the renormalized allowed distribution. The end-of-text token counts
// against the budget. With `mask` null decoding is unconstrained and stops
// at end-of-text or the budget.
Generation constrained_generate(const Backend& backend, const TokenMaskIndex* mask,
                                std::span<const TokenId> prompt, DecodeBudget budget,
                                DecodeMode mode);

}  // namespace cotattr
