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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cotattr/backend.hpp"
#include "cotattr/grammar.hpp"
#include "cotattr/language.hpp"
#include "cotattr/prompt.hpp"
#include "cotattr/record.hpp"

namespace testing {

using namespace cotattr;

// End-of-text at id 0, then printable ASCII and newline, one token each.
inline Vocabulary char_vocab(std::vector<std::string> extra = {}) {
  std::vector<std::string> s = {"<|endoftext|>"};
  for (char c = 0x20; c < 0x7f; ++c) s.emplace_back(1, c);
  s.emplace_back("\n");
  for (auto& e : extra) s.push_back(std::move(e));
  return Vocabulary(std::move(s), 0);
}

inline TokenId id_of(const Vocabulary& v, const std::string& surface) {
  for (TokenId i = 0; i < v.size(); ++i) {
    if (v.surface(i) == surface && !v.is_special(i)) return i;
  }
  throw std::runtime_error("no token " + surface);
}

inline std::string step_body(std::size_t i) {
  return "fact number " + std::to_string(i) + " holds.";
}

// Compliant English CoT text with `n` steps and the given answer.
inline std::string cot_text(std::size_t n, const std::string& answer = "7") {
  std::string t = "Step-by-Step Answer:\n";
  for (std::size_t i = 0; i < n; ++i) t += "- " + step_body(i) + "\n";
  return t + "The answer is " + answer + ".";
}

inline GenerationRecord make_record(std::size_t n, const std::string& answer = "7",
                                    const std::string& prompt = "Q: how many?\n") {
  GenerationRecord r;
  r.id = "en/CoT-Struct/t" + std::to_string(n);
  r.problem_id = "t" + std::to_string(n);
  r.language = "en";
  r.prompt = prompt;
  r.output = cot_text(n, answer);
  r.parsed = parse_structured(r.output, LanguageConfig::english());
  r.finish = FinishReason::kAccepted;
  return r;
}

// Answer-token log-probability as a function of which step markers are
// present in the ablated prompt. Logits put exactly `lp` on "7", the rest of
// the mass on "8", and kFloorLogit elsewhere.
inline ScriptedBackend step_backend(std::size_t n,
                                    std::function<double(const std::vector<bool>&)> lp) {
  Vocabulary v = char_vocab();
  const TokenId seven = id_of(v, "7");
  const TokenId eight = id_of(v, "8");
  Vocabulary copy = v;
  auto fn = [copy, seven, eight, n, lp](std::span<const TokenId> prefix) {
    const std::string text = copy.detokenize(prefix);
    std::vector<bool> present(n);
    for (std::size_t i = 0; i < n; ++i) {
      present[i] = text.find("- " + step_body(i) + "\n") != std::string::npos;
    }
    LogitVector logits(copy.size(), MockBackend::kFloorLogit);
    const double l = lp(present);
    logits[seven] = l;
    logits[eight] = std::log(-std::expm1(l));
    return logits;
  };
  return ScriptedBackend(std::move(v), fn);
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() /
           ("cotattr-" + name + "-" + std::to_string(std::random_device{}()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing
