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
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "cotattr/saliency_matrix.hpp"

namespace cotattr {

using TokenId = std::uint32_t;
using TokenSeq = std::vector<TokenId>;
// Unnormalized next-token scores, one per vocabulary entry.
using LogitVector = std::vector<double>;

// Ordered token surfaces with dense ids. Special tokens (end-of-text among
// them) never take part in text segmentation.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> surfaces, TokenId eot,
             std::vector<TokenId> extra_specials = {});

  std::size_t size() const { return surfaces_.size(); }
  const std::string& surface(TokenId id) const { return surfaces_.at(id); }
  TokenId eot() const { return eot_; }
  bool is_special(TokenId id) const { return special_.at(id); }
  std::vector<TokenId> specials() const;

  // Greedy longest-match segmentation over non-special surfaces.
  // Throws UnencodableText when some byte cannot be covered.
  TokenSeq tokenize(std::string_view text) const;
  // Special tokens contribute nothing to the text.
  std::string detokenize(std::span<const TokenId> ids) const;

  // FNV-1a over surfaces and special flags; keys compiled-grammar caches.
  std::uint64_t hash() const;

  // {"tokens": [str | [byte,...]], "eot": id, "special": [ids],
  //  "byte_fallback": bool}. With byte_fallback every byte value missing as
  // a single-byte surface is appended as its own token.
  static Vocabulary from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

 private:
  std::vector<std::string> surfaces_;
  std::vector<bool> special_;
  TokenId eot_ = 0;
  std::size_t max_len_ = 0;
  std::unordered_map<std::string, TokenId> index_;
};

struct BackendCapabilities {
  bool supports_logprob_scoring = true;
  bool supports_token_saliency = false;
};

// log softmax(logits)[token], computed in double with max subtraction.
double log_softmax_at(std::span<const double> logits, TokenId token);
std::vector<double> softmax(std::span<const double> logits);

// A token-level language model. Implementations must be safe for concurrent
// const calls.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual const Vocabulary& vocab() const = 0;
  virtual BackendCapabilities capabilities() const = 0;
  virtual std::size_t context_limit() const = 0;

  // Rejects invalid UTF-8 with UnencodableText.
  virtual TokenSeq tokenize(std::string_view text) const;
  std::string detokenize(std::span<const TokenId> ids) const {
    return vocab().detokenize(ids);
  }

  virtual LogitVector next_token_logits(std::span<const TokenId> prefix) const = 0;

  // Sum over completion positions of the next-token log-probability.
  // Requires a non-empty completion.
  virtual double score_completion(std::span<const TokenId> prefix,
                                  std::span<const TokenId> completion) const;

  // Gradient saliency of each generated token w.r.t. every input position.
  virtual SaliencyMatrix token_saliency(std::span<const TokenId> prompt,
                                        std::span<const TokenId> generation) const;

 protected:
  void check_context(std::size_t length) const;
};

// Context-keyed conditional model used for oracles and tests.
//
// The distribution for a prefix is looked up in order:
//   1. the first cue whose `contains` text occurs in the detokenized prefix
//      and whose `context` (if any) is a suffix of the prefix;
//   2. the longest suffix of the prefix, at most `order` tokens, listed in
//      `contexts` (the empty key only matches the empty prefix);
//   3. `fallback`, or uniform when no fallback is declared.
// Listed probabilities become log-probabilities. Leftover mass is spread
// evenly over unlisted tokens; when none is left they get kFloorLogit, which
// exponentiates to exactly zero in double precision.
struct MockTable {
  struct Cue {
    std::string contains;
    TokenSeq context;
    std::map<TokenId, double> dist;
  };

  std::size_t order = 3;
  std::size_t context_limit = 8192;
  std::map<TokenSeq, std::map<TokenId, double>> contexts;
  std::map<TokenId, double> fallback;
  std::vector<Cue> cues;
  std::optional<SaliencyMatrix> saliency;
};

class MockBackend final : public Backend {
 public:
  static constexpr double kFloorLogit = -1.0e4;

  MockBackend(Vocabulary vocab, MockTable table);

  // Table file: {"vocab": {...}, "order": K, "context_limit": N,
  //  "contexts": {"1,2": {"3": 0.5, ...}, "": {...}}, "fallback": {...},
  //  "cues": [{"contains": str, "context": [ids], "dist": {...}}],
  //  "saliency": <fixture>}.
  static MockBackend from_json(const nlohmann::json& j);
  static MockBackend load(const std::filesystem::path& path);

  const Vocabulary& vocab() const override { return vocab_; }
  BackendCapabilities capabilities() const override;
  std::size_t context_limit() const override { return table_.context_limit; }
  LogitVector next_token_logits(std::span<const TokenId> prefix) const override;
  SaliencyMatrix token_saliency(std::span<const TokenId> prompt,
                                std::span<const TokenId> generation) const override;

  const MockTable& table() const { return table_; }

 private:
  const std::map<TokenId, double>* lookup(std::span<const TokenId> prefix) const;
  LogitVector to_logits(const std::map<TokenId, double>* dist) const;

  Vocabulary vocab_;
  MockTable table_;
};

// Backend whose next-token logits come from a caller-supplied pure function.
class ScriptedBackend final : public Backend {
 public:
  using LogitFn = std::function<LogitVector(std::span<const TokenId>)>;

  ScriptedBackend(Vocabulary vocab, LogitFn fn, std::size_t context_limit = 1 << 20);

  const Vocabulary& vocab() const override { return vocab_; }
  BackendCapabilities capabilities() const override { return {true, false}; }
  std::size_t context_limit() const override { return context_limit_; }
  LogitVector next_token_logits(std::span<const TokenId> prefix) const override;

 private:
  Vocabulary vocab_;
  LogitFn fn_;
  std::size_t context_limit_;
};

// Parses "1,2,3" into token ids; "" is the empty context.
TokenSeq parse_context_key(std::string_view key);
std::string context_key(std::span<const TokenId> ids);

}  // namespace cotattr
