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

#include "cotattr/perturb.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "cotattr/errors.hpp"

namespace cotattr {

using nlohmann::json;

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string SentenceSplit::join() const {
  std::string out = leading;
  for (const auto& s : sentences) out += s.text + s.trailing;
  return out;
}

SentenceSplit split_sentences(std::string_view q, std::span<const std::string> terminators) {
  SentenceSplit out;
  std::size_t pos = 0;
  while (pos < q.size() && is_space(q[pos])) ++pos;
  out.leading = std::string(q.substr(0, pos));

  std::vector<std::string> terms(terminators.begin(), terminators.end());
  terms.push_back("?");
  std::size_t start = pos;
  while (pos < q.size()) {
    std::string matched;
    for (const auto& t : terms) {
      if (!t.empty() && q.substr(pos, t.size()) == t && t.size() > matched.size()) matched = t;
    }
    if (matched.empty()) {
      ++pos;
      continue;
    }
    const std::size_t after = pos + matched.size();
    if (matched == "." && after < q.size() && !is_space(q[after])) {
      pos = after;
      continue;
    }
    std::size_t end_ws = after;
    while (end_ws < q.size() && is_space(q[end_ws])) ++end_ws;
    out.sentences.push_back({std::string(q.substr(start, after - start)), matched,
                             std::string(q.substr(after, end_ws - after))});
    start = pos = end_ws;
  }
  if (start < q.size()) {
    std::size_t end = q.size();
    while (end > start && is_space(q[end - 1])) --end;
    out.sentences.push_back(
        {std::string(q.substr(start, end - start)), "", std::string(q.substr(end))});
  }
  return out;
}

std::string to_string(PerturbKind k) {
  return k == PerturbKind::kNegation ? "negation" : "distractor";
}

PerturbKind perturb_kind_from_string(std::string_view s) {
  if (s == "negation") return PerturbKind::kNegation;
  if (s == "distractor") return PerturbKind::kDistractor;
  throw PerturbError("unknown perturbation kind '" + std::string(s) + "'");
}

std::string to_string(Provenance p) {
  return p == Provenance::kHeuristic ? "heuristic" : "override";
}

json PerturbationSpec::to_json() const {
  return {{"kind", to_string(kind)},
          {"target", target ? json(*target) : json(nullptr)},
          {"text", text},
          {"provenance", to_string(provenance)}};
}

OverrideMap overrides_from_json(const json& j) {
  if (!j.is_object()) throw PerturbError("override file must be a JSON object");
  OverrideMap out;
  for (const auto& [id, entry] : j.items()) {
    if (!entry.is_object()) throw PerturbError("override for '" + id + "' must be an object");
    PerturbOverride o;
    for (const auto& [key, value] : entry.items()) {
      if (!value.is_string()) throw PerturbError("override '" + id + "." + key + "' must be a string");
      if (key == "negation") {
        o.negation = value.get<std::string>();
      } else if (key == "distractor") {
        o.distractor = value.get<std::string>();
      } else {
        throw PerturbError("override '" + id + "' has unknown key '" + key + "'");
      }
    }
    out.emplace(id, std::move(o));
  }
  return out;
}

OverrideMap load_overrides(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PerturbError("cannot open override file " + path.string());
  try {
    return overrides_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw PerturbError("override file " + path.string() + ": " + e.what());
  }
}

namespace {

// Past form -> base form.
const std::unordered_map<std::string, std::string>& irregular_past() {
  static const std::unordered_map<std::string, std::string> kMap = {
      {"ate", "eat"},       {"became", "become"}, {"began", "begin"},   {"bought", "buy"},
      {"brought", "bring"}, {"built", "build"},   {"came", "come"},     {"caught", "catch"},
      {"chose", "choose"},  {"cut", "cut"},       {"drank", "drink"},   {"drew", "draw"},
      {"drove", "drive"},   {"fed", "feed"},      {"felt", "feel"},     {"found", "find"},
      {"flew", "fly"},      {"forgot", "forget"}, {"gave", "give"},     {"got", "get"},
      {"grew", "grow"},     {"had", "have"},      {"held", "hold"},     {"kept", "keep"},
      {"knew", "know"},     {"laid", "lay"},      {"led", "lead"},      {"left", "leave"},
      {"lent", "lend"},     {"lost", "lose"},     {"made", "make"},     {"meant", "mean"},
      {"met", "meet"},      {"paid", "pay"},      {"put", "put"},       {"ran", "run"},
      {"rode", "ride"},     {"sat", "sit"},       {"saw", "see"},       {"said", "say"},
      {"sent", "send"},     {"sold", "sell"},     {"spent", "spend"},   {"stole", "steal"},
      {"swam", "swim"},     {"took", "take"},     {"taught", "teach"},  {"told", "tell"},
      {"thought", "think"}, {"threw", "throw"},   {"went", "go"},       {"won", "win"},
      {"wore", "wear"},     {"wrote", "write"},   {"baked", "bake"},    {"used", "use"},
      {"saved", "save"},    {"shared", "share"},  {"liked", "like"},    {"placed", "place"},
      {"received", "receive"}, {"decided", "decide"}, {"hired", "hire"},
      {"traded", "trade"},  {"served", "serve"},  {"moved", "move"},    {"raised", "raise"},
      {"collected", "collect"}, {"needed", "need"}, {"wanted", "want"}, {"planted", "plant"},
      {"painted", "paint"}, {"visited", "visit"}, {"started", "start"}, {"added", "add"},
      {"rented", "rent"},   {"invested", "invest"}, {"counted", "count"}, {"printed", "print"},
  };
  return kMap;
}

// Third-person singular present forms that plain suffix stripping gets wrong.
const std::unordered_map<std::string, std::string>& irregular_present() {
  static const std::unordered_map<std::string, std::string> kMap = {
      {"has", "have"}, {"does", "do"}, {"goes", "go"},
  };
  return kMap;
}

const std::unordered_set<std::string>& auxiliaries() {
  static const std::unordered_set<std::string> kSet = {
      "is",    "are",    "was",   "were", "am",    "can",  "could", "will",
      "would", "should", "must",  "may",  "might", "shall"};
  return kSet;
}

const std::unordered_set<std::string>& singular_pronouns() {
  static const std::unordered_set<std::string> kSet = {"he", "she", "it", "everyone", "nobody",
                                                       "someone", "each"};
  return kSet;
}

const std::unordered_set<std::string>& plural_pronouns() {
  static const std::unordered_set<std::string> kSet = {"they", "we", "i", "you"};
  return kSet;
}

const std::unordered_set<std::string>& determiners() {
  static const std::unordered_set<std::string> kSet = {
      "the", "a", "an", "his", "her", "their", "its", "my", "our", "your", "this", "that",
      "these", "those", "each", "every", "some", "all", "both"};
  return kSet;
}

bool is_vowel(char c) { return std::string_view("aeiou").find(c) != std::string_view::npos; }

std::string strip_third_person(const std::string& w) {
  auto ends = [&](std::string_view s) {
    return w.size() > s.size() && w.compare(w.size() - s.size(), s.size(), s) == 0;
  };
  if (ends("ies") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
  for (std::string_view s : {"sses", "shes", "ches", "xes", "zes", "oes"}) {
    if (ends(s)) return w.substr(0, w.size() - 2);
  }
  return w.substr(0, w.size() - 1);
}

std::string strip_past(const std::string& w) {
  if (w.size() > 4 && w.compare(w.size() - 3, 3, "ied") == 0) return w.substr(0, w.size() - 3) + "y";
  std::string stem = w.substr(0, w.size() - 2);
  const std::size_t n = stem.size();
  if (n >= 3 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) &&
      std::string_view("lsz").find(stem[n - 1]) == std::string_view::npos) {
    stem.pop_back();
  }
  return stem;
}

struct Word {
  std::size_t begin;
  std::size_t end;
};

std::vector<Word> words_of(std::string_view s) {
  std::vector<Word> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const std::size_t b = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > b) out.push_back({b, i});
  }
  return out;
}

bool alpha_word(std::string_view w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](char c) {
    return std::isalpha(static_cast<unsigned char>(c)) != 0;
  });
}

}  // namespace

std::string negate_sentence(std::string_view sentence) {
  const auto words = words_of(sentence);
  for (std::size_t k = 1; k < words.size(); ++k) {
    const std::string raw(sentence.substr(words[k].begin, words[k].end - words[k].begin));
    if (!alpha_word(raw)) continue;
    const std::string w = lower(raw);
    const std::string prev = lower(sentence.substr(words[k - 1].begin,
                                                   words[k - 1].end - words[k - 1].begin));
    if (k + 1 < words.size() &&
        lower(sentence.substr(words[k + 1].begin, words[k + 1].end - words[k + 1].begin)) ==
            "not") {
      throw PerturbError("sentence is already negated");
    }
    std::string replacement;
    if (auxiliaries().count(w)) {
      replacement = raw + " not";
    } else if (auto it = irregular_past().find(w); it != irregular_past().end()) {
      replacement = "did not " + it->second;
    } else if (w.size() > 3 && w.ends_with("ed")) {
      replacement = "did not " + strip_past(w);
    } else if (auto pt = irregular_present().find(w); pt != irregular_present().end()) {
      replacement = "does not " + pt->second;
    } else if (plural_pronouns().count(prev)) {
      replacement = "do not " + w;
    } else if (w.size() > 2 && w.back() == 's' && !w.ends_with("ss") &&
               !determiners().count(prev) &&
               (k == 1 || singular_pronouns().count(prev) ||
                std::isupper(static_cast<unsigned char>(sentence[words[k - 1].begin])) ||
                (k >= 2 && determiners().count(lower(sentence.substr(
                               words[k - 2].begin, words[k - 2].end - words[k - 2].begin))) &&
                 !prev.ends_with("s")))) {
      replacement = "does not " + strip_third_person(w);
    } else {
      continue;
    }
    std::string out(sentence.substr(0, words[k].begin));
    out += replacement;
    out += sentence.substr(words[k].end);
    return out;
  }
  throw PerturbError("no main verb recognized in '" + std::string(sentence) + "'");
}

std::optional<std::size_t> middle_statement(const SentenceSplit& split) {
  if (split.size() < 3) return std::nullopt;
  std::vector<std::size_t> statements;
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (!split.sentences[i].is_question()) statements.push_back(i);
  }
  if (statements.empty()) return std::nullopt;
  return statements[(statements.size() - 1) / 2];
}

namespace {

const PerturbOverride* find_override(const OverrideMap& overrides, const std::string& id) {
  auto it = overrides.find(id);
  return it == overrides.end() ? nullptr : &it->second;
}

}  // namespace

Perturbed negate(const Problem& problem, const LanguageConfig& lang,
                 const OverrideMap& overrides) {
  if (const auto* o = find_override(overrides, problem.id); o && o->negation) {
    return {*o->negation, {PerturbKind::kNegation, std::nullopt, *o->negation, Provenance::kOverride}};
  }
  if (lang.code != "en") {
    throw PerturbError("negation for language '" + lang.code + "' requires an override (" +
                       problem.id + ")");
  }
  SentenceSplit split = split_sentences(problem.question, lang.terminators);
  const auto mid = middle_statement(split);
  if (!mid) throw PerturbError("question " + problem.id + " has no middle sentence");
  Sentence& s = split.sentences[*mid];
  s.text = negate_sentence(s.text);
  return {split.join(), {PerturbKind::kNegation, *mid, s.text, Provenance::kHeuristic}};
}

std::optional<std::string> first_subject(std::string_view question) {
  static const std::unordered_set<std::string> kStop = {
      "the", "a", "an", "he", "she", "it", "they", "we", "i", "you", "there", "if", "how",
      "what", "when", "where", "which", "who", "why", "each", "every", "his", "her", "their",
      "this", "that", "these", "those", "in", "on", "at", "after", "before", "for", "one",
      "two", "three", "some", "all", "my", "our", "your", "its", "then", "but", "and"};
  for (const auto& w : words_of(question)) {
    std::string_view token = question.substr(w.begin, w.end - w.begin);
    while (!token.empty() && !std::isalpha(static_cast<unsigned char>(token.back()))) {
      token.remove_suffix(1);
    }
    if (token.ends_with("'s")) token.remove_suffix(2);
    if (!alpha_word(token) || !std::isupper(static_cast<unsigned char>(token.front()))) continue;
    if (kStop.count(lower(token))) continue;
    return std::string(token);
  }
  // No name: "A baker makes ..." gives "The baker".
  const auto ws = words_of(question);
  if (ws.size() >= 2) {
    const std::string first = lower(question.substr(ws[0].begin, ws[0].end - ws[0].begin));
    const std::string_view noun = question.substr(ws[1].begin, ws[1].end - ws[1].begin);
    if ((first == "a" || first == "an" || first == "the") && alpha_word(noun) &&
        std::islower(static_cast<unsigned char>(noun.front()))) {
      return "The " + std::string(noun);
    }
  }
  return std::nullopt;
}

const std::vector<std::string>& distractor_inventory() {
  static const std::vector<std::string> kPhrases = {
      "drinks 3 cans of soda",
      "reads 4 pages of a magazine",
      "walks 2 miles to the park",
      "paints 5 pictures of birds",
      "watches 6 episodes of a cartoon",
      "sings 7 songs in the shower",
      "folds 8 paper airplanes",
      "waters 9 plants on the balcony",
  };
  return kPhrases;
}

Perturbed distract(const Problem& problem, const LanguageConfig& lang,
                   const OverrideMap& overrides, std::size_t ordinal) {
  if (const auto* o = find_override(overrides, problem.id); o && o->distractor) {
    return {*o->distractor,
            {PerturbKind::kDistractor, std::nullopt, *o->distractor, Provenance::kOverride}};
  }
  if (lang.code != "en") {
    throw PerturbError("distractor for language '" + lang.code + "' requires an override (" +
                       problem.id + ")");
  }
  const auto subject = first_subject(problem.question);
  if (!subject) throw PerturbError("no subject found in question " + problem.id);
  SentenceSplit split = split_sentences(problem.question, lang.terminators);
  if (split.size() == 0) throw PerturbError("question " + problem.id + " is empty");

  const auto& inv = distractor_inventory();
  const std::string text = *subject + " " + inv[ordinal % inv.size()] + lang.primary_terminator();
  const std::size_t at = split.size() - 1;
  const std::string sep = at > 0 && !split.sentences[at - 1].trailing.empty()
                              ? split.sentences[at - 1].trailing
                              : std::string(" ");
  split.sentences.insert(split.sentences.begin() + static_cast<std::ptrdiff_t>(at),
                         Sentence{text, lang.primary_terminator(), sep});
  return {split.join(), {PerturbKind::kDistractor, at, text, Provenance::kHeuristic}};
}

Perturbed perturb(PerturbKind kind, const Problem& problem, const LanguageConfig& lang,
                  const OverrideMap& overrides, std::size_t ordinal) {
  return kind == PerturbKind::kNegation ? negate(problem, lang, overrides)
                                        : distract(problem, lang, overrides, ordinal);
}

}  // namespace cotattr
