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

#include "cotattr/grammar.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "cotattr/errors.hpp"
#include "cotattr/utf8.hpp"

namespace cotattr {

using nlohmann::json;

namespace {
constexpr int kCacheVersion = 1;
}

std::string to_string(TemplateId id) {
  switch (id) {
    case TemplateId::kCot: return "cot";
    case TemplateId::kAnswerOnly: return "answer-only";
    case TemplateId::kNone: return "none";
  }
  return "none";
}

TemplateId template_from_string(std::string_view name) {
  if (name == "cot") return TemplateId::kCot;
  if (name == "answer-only") return TemplateId::kAnswerOnly;
  if (name == "none") return TemplateId::kNone;
  throw GrammarError("unknown grammar '" + std::string(name) + "'");
}

std::string regex_escape(std::string_view text) {
  static constexpr std::string_view kMeta = R"(\.^$|?*+()[]{}-/)";
  std::string out;
  out.reserve(text.size() * 2);
  for (char c : text) {
    if (kMeta.find(c) != std::string_view::npos) out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string GrammarTemplate::pattern(const LanguageConfig& lang) const {
  if (id == TemplateId::kNone) return R"([\s\S]*)";
  lang.validate();
  if (min_steps < 1 || max_steps < min_steps) {
    throw GrammarError("step bounds must satisfy 1 <= min <= max");
  }
  std::string term = "[";
  for (const auto& t : lang.terminators) term += regex_escape(t);
  term += "]";
  const std::string answer =
      "(?:" + regex_escape(lang.answer_phrase) + R"()\s+(?P<answer>\d+))" + term;
  if (id == TemplateId::kAnswerOnly) return answer;
  return "(?P<prefix>" + regex_escape(lang.preamble) + ")\\n(?P<steps>(?:-[^\\n]+" + term +
         "\\n){" + std::to_string(min_steps) + "," + std::to_string(max_steps) + "})" + answer;
}

Dfa compile(const GrammarTemplate& tmpl, const LanguageConfig& lang) {
  try {
    return Dfa::from_regex(tmpl.pattern(lang));
  } catch (const DataError& e) {
    throw GrammarError(std::string("invalid language phrases: ") + e.what());
  }
}

bool check_compliance(std::string_view text, const Dfa& dfa) {
  return dfa.matches_utf8(text);
}

// ---------------------------------------------------------------------------
// TokenMaskIndex
// ---------------------------------------------------------------------------

TokenMaskIndex TokenMaskIndex::build(Dfa dfa, const Vocabulary& vocab) {
  TokenMaskIndex idx;
  idx.dfa_ = std::make_shared<const Dfa>(std::move(dfa));
  idx.vocab_size_ = vocab.size();
  idx.eot_ = vocab.eot();

  std::vector<std::optional<std::u32string>> decoded(vocab.size());
  for (std::size_t t = 0; t < vocab.size(); ++t) {
    if (vocab.is_special(static_cast<TokenId>(t))) continue;
    decoded[t] = utf8::decode(vocab.surface(static_cast<TokenId>(t)));
  }

  const std::size_t words = (vocab.size() + 63) / 64;
  idx.rows_.resize(idx.dfa_->num_states());
  for (std::size_t s = 0; s < idx.rows_.size(); ++s) {
    Row& row = idx.rows_[s];
    row.bits.assign(words, 0);
    for (std::size_t t = 0; t < vocab.size(); ++t) {
      if (!decoded[t] || decoded[t]->empty()) continue;
      const State end = idx.dfa_->run(static_cast<State>(s), *decoded[t]);
      if (end == Dfa::kDead) continue;
      row.bits[t / 64] |= std::uint64_t{1} << (t % 64);
      row.tokens.push_back(static_cast<TokenId>(t));
      row.targets.push_back(end);
    }
    if (idx.dfa_->accepting(static_cast<State>(s))) {
      row.bits[idx.eot_ / 64] |= std::uint64_t{1} << (idx.eot_ % 64);
    }
  }
  return idx;
}

bool TokenMaskIndex::allowed(State s, TokenId t) const {
  if (s == Dfa::kDead || t >= vocab_size_) return false;
  return (rows_[s].bits[t / 64] >> (t % 64)) & 1U;
}

TokenMaskIndex::State TokenMaskIndex::next(State s, TokenId t) const {
  if (!allowed(s, t)) return Dfa::kDead;
  if (t == eot_) return s;
  const Row& row = rows_[s];
  auto it = std::lower_bound(row.tokens.begin(), row.tokens.end(), t);
  return row.targets[static_cast<std::size_t>(it - row.tokens.begin())];
}

std::vector<TokenId> TokenMaskIndex::allowed_tokens(State s) const {
  if (s == Dfa::kDead) return {};
  std::vector<TokenId> out = rows_[s].tokens;
  if (dfa_->accepting(s)) out.insert(std::upper_bound(out.begin(), out.end(), eot_), eot_);
  return out;
}

std::size_t TokenMaskIndex::allowed_count(State s) const {
  if (s == Dfa::kDead) return 0;
  return rows_[s].tokens.size() + (dfa_->accepting(s) ? 1 : 0);
}

json TokenMaskIndex::to_json() const {
  json rows = json::array();
  for (const Row& r : rows_) rows.push_back({{"tokens", r.tokens}, {"targets", r.targets}});
  return {{"dfa", dfa_->to_json()}, {"vocab_size", vocab_size_}, {"eot", eot_}, {"rows", rows}};
}

TokenMaskIndex TokenMaskIndex::from_json(const json& j) {
  TokenMaskIndex idx;
  try {
    idx.dfa_ = std::make_shared<const Dfa>(Dfa::from_json(j.at("dfa")));
    idx.vocab_size_ = j.at("vocab_size").get<std::size_t>();
    idx.eot_ = j.at("eot").get<TokenId>();
    const auto& rows = j.at("rows");
    if (rows.size() != idx.dfa_->num_states()) throw GrammarError("mask cache: row count");
    const std::size_t words = (idx.vocab_size_ + 63) / 64;
    for (std::size_t s = 0; s < rows.size(); ++s) {
      Row row;
      row.tokens = rows[s].at("tokens").get<std::vector<TokenId>>();
      row.targets = rows[s].at("targets").get<std::vector<State>>();
      if (row.tokens.size() != row.targets.size()) throw GrammarError("mask cache: row shape");
      row.bits.assign(words, 0);
      for (TokenId t : row.tokens) {
        if (t >= idx.vocab_size_) throw GrammarError("mask cache: token out of range");
        row.bits[t / 64] |= std::uint64_t{1} << (t % 64);
      }
      if (idx.dfa_->accepting(static_cast<State>(s))) {
        row.bits[idx.eot_ / 64] |= std::uint64_t{1} << (idx.eot_ % 64);
      }
      idx.rows_.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    throw GrammarError(std::string("mask cache: ") + e.what());
  }
  return idx;
}

// ---------------------------------------------------------------------------
// Cache
// ---------------------------------------------------------------------------

std::string GrammarCacheKey::file_name() const {
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(vocab_hash));
  return template_id + "-" + language + "-" + hex + ".json";
}

void save_grammar_cache(const std::filesystem::path& path, const GrammarCacheKey& key,
                        const TokenMaskIndex& index) {
  json j = {{"version", kCacheVersion},
            {"template", key.template_id},
            {"language", key.language},
            {"vocab_hash", key.vocab_hash},
            {"index", index.to_json()}};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw GrammarError("cannot write grammar cache " + path.string());
  out << j.dump() << '\n';
}

std::optional<TokenMaskIndex> load_grammar_cache(const std::filesystem::path& path,
                                                 const GrammarCacheKey& key) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    const json j = json::parse(in);
    if (j.value("version", 0) != kCacheVersion || j.value("template", "") != key.template_id ||
        j.value("language", "") != key.language ||
        j.value("vocab_hash", std::uint64_t{0}) != key.vocab_hash) {
      return std::nullopt;
    }
    return TokenMaskIndex::from_json(j.at("index"));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

TokenMaskIndex build_grammar(const GrammarTemplate& tmpl, const LanguageConfig& lang,
                             const Vocabulary& vocab,
                             const std::optional<std::filesystem::path>& cache_dir) {
  const GrammarCacheKey key{to_string(tmpl.id), lang.code, vocab.hash()};
  if (cache_dir) {
    const auto path = *cache_dir / key.file_name();
    if (auto cached = load_grammar_cache(path, key)) return std::move(*cached);
    TokenMaskIndex idx = TokenMaskIndex::build(compile(tmpl, lang), vocab);
    save_grammar_cache(path, key, idx);
    return idx;
  }
  return TokenMaskIndex::build(compile(tmpl, lang), vocab);
}

// ---------------------------------------------------------------------------
// Decoding
// ---------------------------------------------------------------------------

std::string to_string(FinishReason r) {
  switch (r) {
    case FinishReason::kAccepted: return "accepted";
    case FinishReason::kBudgetExhausted: return "budget_exhausted";
    case FinishReason::kDeadEnd: return "dead_end";
  }
  return "dead_end";
}

FinishReason finish_reason_from_string(std::string_view s) {
  if (s == "accepted") return FinishReason::kAccepted;
  if (s == "budget_exhausted") return FinishReason::kBudgetExhausted;
  if (s == "dead_end") return FinishReason::kDeadEnd;
  throw DataError("unknown finish reason '" + std::string(s) + "'");
}

Generation constrained_generate(const Backend& backend, const TokenMaskIndex* mask,
                                std::span<const TokenId> prompt, DecodeBudget budget,
                                DecodeMode mode) {
  const Vocabulary& vocab = backend.vocab();
  if (mask && mask->vocab_size() != vocab.size()) {
    throw GrammarError("mask index built for a different vocabulary");
  }
  std::mt19937_64 rng(mode.seed);
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  TokenSeq context(prompt.begin(), prompt.end());
  Generation gen;
  Dfa::State state = mask ? mask->dfa().start() : 0;
  std::size_t emitted = 0;

  while (emitted < budget.max_new_tokens) {
    LogitVector logits = backend.next_token_logits(context);
    if (mask) {
      for (std::size_t t = 0; t < logits.size(); ++t) {
        if (!mask->allowed(state, static_cast<TokenId>(t))) logits[t] = kNegInf;
      }
    }
    double best = kNegInf;
    std::size_t best_id = logits.size();
    for (std::size_t t = 0; t < logits.size(); ++t) {
      if (logits[t] > best) {
        best = logits[t];
        best_id = t;
      }
    }
    if (best_id == logits.size()) {
      gen.finish = FinishReason::kDeadEnd;
      break;
    }

    auto choice = static_cast<TokenId>(best_id);
    if (mode.sample) {
      double total = 0.0;
      for (double& v : logits) {
        v = v == kNegInf ? 0.0 : std::exp(v - best);
        total += v;
      }
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
      double acc = 0.0;
      for (std::size_t t = 0; t < logits.size(); ++t) {
        if (logits[t] == 0.0) continue;
        acc += logits[t];
        choice = static_cast<TokenId>(t);
        if (u < acc) break;
      }
    }

    ++emitted;
    if (choice == vocab.eot()) {
      gen.finish = FinishReason::kAccepted;
      break;
    }
    if (mask) state = mask->next(state, choice);
    gen.tokens.push_back(choice);
    context.push_back(choice);
  }
  if (emitted >= budget.max_new_tokens && gen.finish != FinishReason::kAccepted &&
      gen.finish != FinishReason::kDeadEnd) {
    gen.finish = FinishReason::kBudgetExhausted;
  }
  gen.text = vocab.detokenize(gen.tokens);
  return gen;
}

}  // namespace cotattr
