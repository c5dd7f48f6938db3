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
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "cotattr/grammar.hpp"
#include "cotattr/prompt.hpp"

namespace cotattr {

// One model answer to one problem under one setup; a generations.jsonl row.
struct GenerationRecord {
  std::string id;
  std::string problem_id;
  std::string language;
  SetupId setup = SetupId::kCotStruct;
  std::string prompt;
  std::string output;
  FinishReason finish = FinishReason::kBudgetExhausted;
  ParsedResponse parsed;
  std::int64_t gold = 0;
  std::size_t prompt_tokens = 0;
  std::size_t output_tokens = 0;
  // Set when the backend failed for this record; output is then empty.
  std::optional<std::string> error;
  std::string config_hash;
  std::uint64_t seed = 0;

  bool compliant() const { return parsed.compliant; }
  bool correct() const { return parsed.answer && *parsed.answer == gold; }

  nlohmann::json to_json() const;
  static GenerationRecord from_json(const nlohmann::json& j);
};

std::string make_record_id(const std::string& language, SetupId setup,
                           const std::string& problem_id);

}  // namespace cotattr
