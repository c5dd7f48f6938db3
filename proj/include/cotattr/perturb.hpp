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

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cotattr/language.hpp"
#include "cotattr/prompt.hpp"

namespace cotattr {

struct Sentence {
  std::string text;      // includes the terminal punctuation, if any
  std::string terminal;  // "" for an unterminated tail
  std::string trailing;  // whitespace up to the next sentence

  bool is_question() const { return terminal == "?"; }
};

struct SentenceSplit {
  std::string leading;  // whitespace before the first sentence
  std::vector<Sentence> sentences;

  std::size_t size() const { return sentences.size(); }
  std::string join() const;
};

// Splits after "?" or any of `terminators`. "." only ends a sentence when
// followed by whitespace or the end of the text, so decimals stay intact.
// join() reproduces the input exactly.
SentenceSplit split_sentences(std::string_view question,
                              std::span<const std::string> terminators = default_terminators());

enum class PerturbKind { kNegation, kDistractor };
enum class Provenance { kHeuristic, kOverride };

std::string to_string(PerturbKind k);
PerturbKind perturb_kind_from_string(std::string_view s);
std::string to_string(Provenance p);

struct PerturbationSpec {
  PerturbKind kind = PerturbKind::kNegation;
  // Edited sentence (negation) or insertion index (distractor). Unset for
  // overrides, which replace the whole question.
  std::optional<std::size_t> target;
  std::string text;
  Provenance provenance = Provenance::kHeuristic;

  nlohmann::json to_json() const;
};

struct PerturbOverride {
  std::optional<std::string> negation;
  std::optional<std::string> distractor;
};

// {"<problem id>": {"negation": "...", "distractor": "..."}}
using OverrideMap = std::map<std::string, PerturbOverride>;
OverrideMap overrides_from_json(const nlohmann::json& j);
OverrideMap load_overrides(const std::filesystem::path& path);

struct Perturbed {
  std::string question;
  PerturbationSpec spec;
};

// English do-support negation of one sentence. Throws PerturbError when no
// main verb is recognized.
std::string negate_sentence(std::string_view sentence);

// Index of the middle statement sentence, floor((n - 1) / 2) over sentences
// not ending in "?". Empty when fewer than three sentences exist.
std::optional<std::size_t> middle_statement(const SentenceSplit& split);

Perturbed negate(const Problem& problem, const LanguageConfig& lang,
                 const OverrideMap& overrides = {});

// First capitalized word that is not a pronoun, article or question word;
// otherwise "The <noun>" when the question opens with an article.
std::optional<std::string> first_subject(std::string_view question);

const std::vector<std::string>& distractor_inventory();

// Inserts "<Subject> <inventory[ordinal % size]>." before the last sentence.
Perturbed distract(const Problem& problem, const LanguageConfig& lang,
                   const OverrideMap& overrides = {}, std::size_t ordinal = 0);

Perturbed perturb(PerturbKind kind, const Problem& problem, const LanguageConfig& lang,
                  const OverrideMap& overrides = {}, std::size_t ordinal = 0);

}  // namespace cotattr
