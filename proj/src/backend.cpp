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

#include "cotattr/backend.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "cotattr/errors.hpp"
#include "cotattr/utf8.hpp"

namespace cotattr {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

Vocabulary::Vocabulary(std::vector<std::string> surfaces, TokenId eot,
                       std::vector<TokenId> extra_specials)
    : surfaces_(std::move(surfaces)), special_(surfaces_.size(), false), eot_(eot) {
  if (eot_ >= surfaces_.size()) throw DataError("vocabulary: eot id out of range");
  special_[eot_] = true;
  for (TokenId id : extra_specials) {
    if (id >= surfaces_.size()) throw DataError("vocabulary: special id out of range");
    special_[id] = true;
  }
  for (std::size_t i = 0; i < surfaces_.size(); ++i) {
    if (special_[i]) continue;
    if (surfaces_[i].empty()) {
      throw DataError("vocabulary: empty surface for non-special token " +
                      std::to_string(i));
    }
    index_.emplace(surfaces_[i], static_cast<TokenId>(i));
    max_len_ = std::max(max_len_, surfaces_[i].size());
  }
}

std::vector<TokenId> Vocabulary::specials() const {
  std::vector<TokenId> out;
  for (std::size_t i = 0; i < special_.size(); ++i) {
    if (special_[i]) out.push_back(static_cast<TokenId>(i));
  }
  return out;
}

TokenSeq Vocabulary::tokenize(std::string_view text) const {
  TokenSeq out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t limit = std::min(max_len_, text.size() - pos);
    bool matched = false;
    for (std::size_t len = limit; len > 0; --len) {
      auto it = index_.find(std::string(text.substr(pos, len)));
      if (it != index_.end()) {
        out.push_back(it->second);
        pos += len;
        matched = true;
        break;
      }
    }
    if (!matched) {
      throw UnencodableText("no token covers byte offset " + std::to_string(pos));
    }
  }
  return out;
}

std::string Vocabulary::detokenize(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId id : ids) {
    if (id >= surfaces_.size()) throw DataError("token id out of range");
    if (!special_[id]) out += surfaces_[id];
  }
  return out;
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ULL;
  };
  for (std::size_t i = 0; i < surfaces_.size(); ++i) {
    for (char c : surfaces_[i]) mix(static_cast<unsigned char>(c));
    mix(0xFF);
    mix(special_[i] ? 1 : 0);
  }
  return h;
}

Vocabulary Vocabulary::from_json(const json& j) {
  std::vector<std::string> surfaces;
  try {
    for (const auto& t : j.at("tokens")) {
      if (t.is_string()) {
        surfaces.push_back(t.get<std::string>());
      } else if (t.is_array()) {
        std::string s;
        for (const auto& b : t) {
          const int v = b.get<int>();
          if (v < 0 || v > 255) throw DataError("vocabulary: byte out of range");
          s.push_back(static_cast<char>(v));
        }
        surfaces.push_back(std::move(s));
      } else {
        throw DataError("vocabulary: token must be a string or byte array");
      }
    }
    std::vector<TokenId> specials;
    if (j.contains("special")) specials = j["special"].get<std::vector<TokenId>>();
    const auto eot = j.at("eot").get<TokenId>();
    if (j.value("byte_fallback", false)) {
      std::vector<bool> have(256, false);
      for (std::size_t i = 0; i < surfaces.size(); ++i) {
        const bool special = i == eot || std::find(specials.begin(), specials.end(),
                                                   i) != specials.end();
        if (!special && surfaces[i].size() == 1) {
          have[static_cast<unsigned char>(surfaces[i][0])] = true;
        }
      }
      for (int b = 0; b < 256; ++b) {
        if (!have[b]) surfaces.emplace_back(1, static_cast<char>(b));
      }
    }
    return Vocabulary(std::move(surfaces), eot, std::move(specials));
  } catch (const json::exception& e) {
    throw DataError(std::string("vocabulary: ") + e.what());
  }
}

json Vocabulary::to_json() const {
  json tokens = json::array();
  for (const auto& s : surfaces_) {
    if (utf8::valid(s)) {
      tokens.push_back(s);
    } else {
      json bytes = json::array();
      for (char c : s) bytes.push_back(static_cast<unsigned char>(c));
      tokens.push_back(std::move(bytes));
    }
  }
  std::vector<TokenId> extra;
  for (TokenId id : specials()) {
    if (id != eot_) extra.push_back(id);
  }
  return {{"tokens", tokens}, {"eot", eot_}, {"special", extra}};
}

// ---------------------------------------------------------------------------
// Softmax helpers
// ---------------------------------------------------------------------------

double log_softmax_at(std::span<const double> logits, TokenId token) {
  if (token >= logits.size()) throw DataError("token outside logit vector");
  double max = -std::numeric_limits<double>::infinity();
  for (double v : logits) max = std::max(max, v);
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - max);
  return logits[token] - max - std::log(sum);
}

std::vector<double> softmax(std::span<const double> logits) {
  double max = -std::numeric_limits<double>::infinity();
  for (double v : logits) max = std::max(max, v);
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - max);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

// ---------------------------------------------------------------------------
// Backend defaults
// ---------------------------------------------------------------------------

TokenSeq Backend::tokenize(std::string_view text) const {
  if (!utf8::valid(text)) throw UnencodableText("text is not valid UTF-8");
  return vocab().tokenize(text);
}

void Backend::check_context(std::size_t length) const {
  if (length > context_limit()) {
    throw ContextOverflow("prefix of " + std::to_string(length) +
                          " tokens exceeds context limit " +
                          std::to_string(context_limit()));
  }
}

double Backend::score_completion(std::span<const TokenId> prefix,
                                 std::span<const TokenId> completion) const {
  if (completion.empty()) throw BackendError("score_completion: empty completion");
  check_context(prefix.size() + completion.size() - 1);
  TokenSeq context(prefix.begin(), prefix.end());
  context.reserve(prefix.size() + completion.size());
  double total = 0.0;
  for (TokenId t : completion) {
    const LogitVector logits = next_token_logits(context);
    total += log_softmax_at(logits, t);
    context.push_back(t);
  }
  return total;
}

SaliencyMatrix Backend::token_saliency(std::span<const TokenId>,
                                       std::span<const TokenId>) const {
  throw CapabilityMissing("backend does not support token saliency");
}

// ---------------------------------------------------------------------------
// MockBackend
// ---------------------------------------------------------------------------

TokenSeq parse_context_key(std::string_view key) {
  TokenSeq out;
  if (key.empty()) return out;
  std::size_t pos = 0;
  while (pos <= key.size()) {
    const std::size_t comma = std::min(key.find(',', pos), key.size());
    TokenId id = 0;
    const auto* first = key.data() + pos;
    const auto* last = key.data() + comma;
    auto [ptr, ec] = std::from_chars(first, last, id);
    if (ec != std::errc() || ptr != last) {
      throw DataError("malformed context key '" + std::string(key) + "'");
    }
    out.push_back(id);
    pos = comma + 1;
  }
  return out;
}

std::string context_key(std::span<const TokenId> ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(ids[i]);
  }
  return out;
}

namespace {

std::map<TokenId, double> parse_dist(const json& j, std::size_t vocab_size) {
  std::map<TokenId, double> dist;
  double sum = 0.0;
  for (const auto& [k, v] : j.items()) {
    const TokenSeq id = parse_context_key(k);
    if (id.size() != 1 || id[0] >= vocab_size) {
      throw DataError("mock table: bad token id '" + k + "'");
    }
    const double p = v.get<double>();
    if (!(p >= 0.0 && p <= 1.0)) throw DataError("mock table: probability outside [0,1]");
    dist[id[0]] = p;
    sum += p;
  }
  if (sum > 1.0 + 1e-9) throw DataError("mock table: probabilities sum above 1");
  return dist;
}

}  // namespace

MockBackend::MockBackend(Vocabulary vocab, MockTable table)
    : vocab_(std::move(vocab)), table_(std::move(table)) {
  if (table_.order == 0) throw DataError("mock table: order must be positive");
  if (table_.saliency) table_.saliency->validate();
}

MockBackend MockBackend::from_json(const json& j) {
  try {
    Vocabulary vocab = Vocabulary::from_json(j.at("vocab"));
    MockTable table;
    table.order = j.value("order", std::size_t{3});
    table.context_limit = j.value("context_limit", std::size_t{8192});
    if (j.contains("contexts")) {
      for (const auto& [key, dist] : j["contexts"].items()) {
        table.contexts[parse_context_key(key)] = parse_dist(dist, vocab.size());
      }
    }
    if (j.contains("fallback")) table.fallback = parse_dist(j["fallback"], vocab.size());
    if (j.contains("cues")) {
      for (const auto& c : j["cues"]) {
        MockTable::Cue cue;
        cue.contains = c.value("contains", std::string());
        if (c.contains("context")) cue.context = c["context"].get<TokenSeq>();
        cue.dist = parse_dist(c.at("dist"), vocab.size());
        table.cues.push_back(std::move(cue));
      }
    }
    if (j.contains("saliency")) table.saliency = SaliencyMatrix::from_json(j["saliency"]);
    return MockBackend(std::move(vocab), std::move(table));
  } catch (const json::exception& e) {
    throw DataError(std::string("mock table: ") + e.what());
  }
}

MockBackend MockBackend::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open mock table " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("mock table " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

BackendCapabilities MockBackend::capabilities() const {
  return {true, table_.saliency.has_value()};
}

const std::map<TokenId, double>* MockBackend::lookup(
    std::span<const TokenId> prefix) const {
  if (!table_.cues.empty()) {
    const std::string text = vocab_.detokenize(prefix);
    for (const auto& cue : table_.cues) {
      if (cue.context.size() > prefix.size()) continue;
      if (!std::equal(cue.context.begin(), cue.context.end(),
                      prefix.end() - static_cast<std::ptrdiff_t>(cue.context.size()))) {
        continue;
      }
      if (text.find(cue.contains) != std::string::npos) return &cue.dist;
    }
  }
  if (prefix.empty()) {
    auto it = table_.contexts.find(TokenSeq{});
    if (it != table_.contexts.end()) return &it->second;
  }
  for (std::size_t len = std::min(table_.order, prefix.size()); len > 0; --len) {
    TokenSeq key(prefix.end() - static_cast<std::ptrdiff_t>(len), prefix.end());
    auto it = table_.contexts.find(key);
    if (it != table_.contexts.end()) return &it->second;
  }
  return table_.fallback.empty() ? nullptr : &table_.fallback;
}

LogitVector MockBackend::to_logits(const std::map<TokenId, double>* dist) const {
  const std::size_t n = vocab_.size();
  if (dist == nullptr) return LogitVector(n, 0.0);
  double listed = 0.0;
  for (const auto& [id, p] : *dist) listed += p;
  const std::size_t unlisted = n - dist->size();
  const double rest = 1.0 - listed;
  const double rest_logit = (unlisted > 0 && rest > 1e-12)
                                ? std::log(rest / static_cast<double>(unlisted))
                                : kFloorLogit;
  LogitVector logits(n, rest_logit);
  for (const auto& [id, p] : *dist) logits[id] = p > 0.0 ? std::log(p) : kFloorLogit;
  return logits;
}

LogitVector MockBackend::next_token_logits(std::span<const TokenId> prefix) const {
  check_context(prefix.size());
  return to_logits(lookup(prefix));
}

SaliencyMatrix MockBackend::token_saliency(std::span<const TokenId>,
                                           std::span<const TokenId>) const {
  if (!table_.saliency) throw CapabilityMissing("mock table declares no saliency fixture");
  return *table_.saliency;
}

// ---------------------------------------------------------------------------
// ScriptedBackend
// ---------------------------------------------------------------------------

ScriptedBackend::ScriptedBackend(Vocabulary vocab, LogitFn fn, std::size_t context_limit)
    : vocab_(std::move(vocab)), fn_(std::move(fn)), context_limit_(context_limit) {}

LogitVector ScriptedBackend::next_token_logits(std::span<const TokenId> prefix) const {
  check_context(prefix.size());
  LogitVector out = fn_(prefix);
  if (out.size() != vocab_.size()) throw BackendError("scripted backend: wrong logit count");
  return out;
}

}  // namespace cotattr
