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
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace cotattr {

// Sorted, disjoint, non-adjacent closed ranges of Unicode scalars.
class CharSet {
 public:
  struct Range {
    char32_t lo;
    char32_t hi;
  };

  CharSet() = default;
  static CharSet single(char32_t c) { return range(c, c); }
  static CharSet range(char32_t lo, char32_t hi);
  static CharSet any();
  static CharSet digits();
  static CharSet whitespace();
  static CharSet word();

  void add(char32_t lo, char32_t hi);
  void add(const CharSet& other);
  CharSet complement() const;
  bool contains(char32_t c) const;
  bool empty() const { return ranges_.empty(); }
  const std::vector<Range>& ranges() const { return ranges_; }

 private:
  std::vector<Range> ranges_;
};

// Deterministic automaton over Unicode scalars, trimmed so that every state
// is reachable from the start and can reach an accepting state. Missing
// transitions go to the implicit dead state kDead.
//
// Scalars are bucketed into equivalence classes: class k covers
// [class_starts[k], class_starts[k+1]) and every state treats all members of
// a class identically.
class Dfa {
 public:
  using State = std::int32_t;
  static constexpr State kDead = -1;

  // Compiles the supported regex subset: literals, escapes (\d \s \w \D \S
  // \W \n \t \r and escaped metacharacters), character classes with ranges
  // and negation, '.', (?:...), (?P<name>...), (...), alternation, and the
  // quantifiers * + ? {m} {m,} {m,n}. Throws GrammarError on syntax errors.
  static Dfa from_regex(std::string_view pattern);

  State start() const { return start_; }
  std::size_t num_states() const { return accepting_.size(); }
  std::size_t num_classes() const { return class_starts_.size(); }
  bool accepting(State s) const { return s != kDead && accepting_[s]; }

  State step(State s, char32_t c) const;
  State run(State s, std::u32string_view input) const;
  // Full-string acceptance.
  bool matches(std::u32string_view input) const;
  bool matches_utf8(std::string_view input) const;

  // Named groups in order of appearance; informational only.
  const std::vector<std::string>& group_names() const { return group_names_; }

  nlohmann::json to_json() const;
  static Dfa from_json(const nlohmann::json& j);

 private:
  std::size_t class_of(char32_t c) const;

  std::vector<char32_t> class_starts_;
  std::vector<State> table_;  // num_states x num_classes
  std::vector<bool> accepting_;
  State start_ = kDead;
  std::vector<std::string> group_names_;
};

}  // namespace cotattr
