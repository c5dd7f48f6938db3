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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cotattr {

// One few-shot demonstration. Step bodies carry no leading hyphen; the
// prompt builder adds "- ".
struct Exemplar {
  std::string question;
  std::vector<std::string> steps;
  std::int64_t answer = 0;
};

// Per-language phrases shared by prompt construction, grammar instantiation
// and output parsing.
struct LanguageConfig {
  std::string code;
  std::string preamble;
  std::string answer_phrase;
  // Each entry is a single Unicode scalar.
  std::vector<std::string> terminators;
  std::vector<Exemplar> exemplars;

  // Terminator used when rendering exemplar answers.
  const std::string& primary_terminator() const { return terminators.front(); }

  // Throws DataError on empty phrases, newlines inside phrases, or
  // multi-character terminators.
  void validate() const;

  static LanguageConfig from_json(const nlohmann::json& j);
  static LanguageConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  // Built-in English configuration with the eight MGSM training exemplars.
  static LanguageConfig english();
};

inline const std::vector<std::string>& default_terminators() {
  static const std::vector<std::string> kTerms = {".", "।", "。"};
  return kTerms;
}

}  // namespace cotattr
