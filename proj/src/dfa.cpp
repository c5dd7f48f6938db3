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

#include "cotattr/dfa.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>

#include "cotattr/errors.hpp"
#include "cotattr/utf8.hpp"

namespace cotattr {

using nlohmann::json;

// ---------------------------------------------------------------------------
// CharSet
// ---------------------------------------------------------------------------

CharSet CharSet::range(char32_t lo, char32_t hi) {
  CharSet s;
  s.add(lo, hi);
  return s;
}

CharSet CharSet::any() { return range(0, utf8::kMaxScalar); }

CharSet CharSet::digits() { return range(U'0', U'9'); }

CharSet CharSet::whitespace() {
  CharSet s;
  s.add(U'\t', U'\r');  // \t \n \v \f \r
  s.add(U' ', U' ');
  return s;
}

CharSet CharSet::word() {
  CharSet s;
  s.add(U'0', U'9');
  s.add(U'A', U'Z');
  s.add(U'_', U'_');
  s.add(U'a', U'z');
  return s;
}

void CharSet::add(char32_t lo, char32_t hi) {
  if (lo > hi) return;
  std::vector<Range> out;
  out.reserve(ranges_.size() + 1);
  bool placed = false;
  for (const Range& r : ranges_) {
    if (r.hi + 1 < lo) {
      out.push_back(r);
    } else if (hi + 1 < r.lo) {
      if (!placed) {
        out.push_back({lo, hi});
        placed = true;
      }
      out.push_back(r);
    } else {
      lo = std::min(lo, r.lo);
      hi = std::max(hi, r.hi);
    }
  }
  if (!placed) out.push_back({lo, hi});
  std::sort(out.begin(), out.end(), [](const Range& a, const Range& b) { return a.lo < b.lo; });
  ranges_ = std::move(out);
}

void CharSet::add(const CharSet& other) {
  for (const Range& r : other.ranges_) add(r.lo, r.hi);
}

CharSet CharSet::complement() const {
  CharSet out;
  char32_t next = 0;
  for (const Range& r : ranges_) {
    if (r.lo > next) out.ranges_.push_back({next, r.lo - 1});
    next = r.hi + 1;
  }
  if (next <= utf8::kMaxScalar) out.ranges_.push_back({next, utf8::kMaxScalar});
  return out;
}

bool CharSet::contains(char32_t c) const {
  auto it = std::upper_bound(ranges_.begin(), ranges_.end(), c,
                             [](char32_t v, const Range& r) { return v < r.lo; });
  if (it == ranges_.begin()) return false;
  --it;
  return c <= it->hi;
}

// ---------------------------------------------------------------------------
// Regex parsing
// ---------------------------------------------------------------------------

namespace {

constexpr int kUnbounded = -1;

struct Node {
  enum class Kind { kEmpty, kSet, kConcat, kAlt, kRepeat };
  Kind kind = Kind::kEmpty;
  CharSet set;
  std::vector<Node> kids;
  int min = 0;
  int max = 0;
};

class Parser {
 public:
  explicit Parser(std::u32string src) : src_(std::move(src)) {}

  Node parse() {
    Node n = parse_alt();
    if (pos_ != src_.size()) fail("unbalanced ')'");
    return n;
  }

  std::vector<std::string> group_names;

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw GrammarError("regex: " + msg + " at offset " + std::to_string(pos_));
  }

  bool at_end() const { return pos_ >= src_.size(); }
  char32_t peek() const { return src_[pos_]; }

  Node parse_alt() {
    std::vector<Node> branches;
    branches.push_back(parse_concat());
    while (!at_end() && peek() == U'|') {
      ++pos_;
      branches.push_back(parse_concat());
    }
    if (branches.size() == 1) return std::move(branches[0]);
    Node n;
    n.kind = Node::Kind::kAlt;
    n.kids = std::move(branches);
    return n;
  }

  Node parse_concat() {
    Node n;
    n.kind = Node::Kind::kConcat;
    while (!at_end() && peek() != U'|' && peek() != U')') {
      n.kids.push_back(parse_repeat());
    }
    return n;
  }

  std::optional<int> parse_int() {
    std::size_t start = pos_;
    long v = 0;
    while (!at_end() && peek() >= U'0' && peek() <= U'9') {
      v = v * 10 + static_cast<long>(peek() - U'0');
      if (v > 10000) fail("repetition bound too large");
      ++pos_;
    }
    if (pos_ == start) return std::nullopt;
    return static_cast<int>(v);
  }

  // Parses {m}, {m,}, {m,n}. Leaves pos_ untouched and returns false when the
  // brace does not start a valid quantifier (it is then a literal).
  bool parse_braces(int& min, int& max) {
    const std::size_t save = pos_;
    ++pos_;
    auto lo = parse_int();
    if (!lo) {
      pos_ = save;
      return false;
    }
    min = *lo;
    max = *lo;
    if (!at_end() && peek() == U',') {
      ++pos_;
      auto hi = parse_int();
      max = hi ? *hi : kUnbounded;
    }
    if (at_end() || peek() != U'}') {
      pos_ = save;
      return false;
    }
    ++pos_;
    if (max != kUnbounded && max < min) fail("repetition bounds out of order");
    return true;
  }

  Node parse_repeat() {
    Node atom = parse_atom();
    while (!at_end()) {
      int min = 0;
      int max = 0;
      const char32_t c = peek();
      if (c == U'*') {
        min = 0;
        max = kUnbounded;
        ++pos_;
      } else if (c == U'+') {
        min = 1;
        max = kUnbounded;
        ++pos_;
      } else if (c == U'?') {
        min = 0;
        max = 1;
        ++pos_;
      } else if (c == U'{' && parse_braces(min, max)) {
      } else {
        break;
      }
      // Lazy and possessive markers do not change the recognized language.
      if (!at_end() && (peek() == U'?' || peek() == U'+')) ++pos_;
      Node rep;
      rep.kind = Node::Kind::kRepeat;
      rep.min = min;
      rep.max = max;
      rep.kids.push_back(std::move(atom));
      atom = std::move(rep);
    }
    return atom;
  }

  Node set_node(CharSet s) {
    Node n;
    n.kind = Node::Kind::kSet;
    n.set = std::move(s);
    return n;
  }

  // Escape shared by atoms and class members. Returns a set.
  CharSet parse_escape() {
    ++pos_;  // backslash
    if (at_end()) fail("dangling backslash");
    const char32_t c = src_[pos_++];
    switch (c) {
      case U'd': return CharSet::digits();
      case U'D': return CharSet::digits().complement();
      case U's': return CharSet::whitespace();
      case U'S': return CharSet::whitespace().complement();
      case U'w': return CharSet::word();
      case U'W': return CharSet::word().complement();
      case U'n': return CharSet::single(U'\n');
      case U't': return CharSet::single(U'\t');
      case U'r': return CharSet::single(U'\r');
      case U'f': return CharSet::single(U'\f');
      case U'v': return CharSet::single(U'\v');
      case U'u': {
        if (pos_ + 4 > src_.size()) fail("truncated \\u escape");
        char32_t v = 0;
        for (int i = 0; i < 4; ++i) {
          const char32_t h = src_[pos_++];
          v <<= 4;
          if (h >= U'0' && h <= U'9') v |= h - U'0';
          else if (h >= U'a' && h <= U'f') v |= h - U'a' + 10;
          else if (h >= U'A' && h <= U'F') v |= h - U'A' + 10;
          else fail("bad hex digit in \\u escape");
        }
        return CharSet::single(v);
      }
      default:
        if ((c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z') || (c >= U'0' && c <= U'9')) {
          fail("unsupported escape");
        }
        return CharSet::single(c);
    }
  }

  CharSet parse_class() {
    ++pos_;  // [
    bool negate = false;
    if (!at_end() && peek() == U'^') {
      negate = true;
      ++pos_;
    }
    CharSet set;
    bool first = true;
    while (true) {
      if (at_end()) fail("unterminated character class");
      if (peek() == U']' && !first) {
        ++pos_;
        break;
      }
      first = false;
      CharSet item;
      std::optional<char32_t> lo;
      if (peek() == U'\\') {
        item = parse_escape();
        if (item.ranges().size() == 1 && item.ranges()[0].lo == item.ranges()[0].hi) {
          lo = item.ranges()[0].lo;
        }
      } else {
        lo = src_[pos_++];
        item = CharSet::single(*lo);
      }
      if (lo && pos_ + 1 < src_.size() && peek() == U'-' && src_[pos_ + 1] != U']') {
        ++pos_;
        char32_t hi;
        if (peek() == U'\\') {
          CharSet h = parse_escape();
          if (h.ranges().size() != 1 || h.ranges()[0].lo != h.ranges()[0].hi) {
            fail("class range bound must be a single character");
          }
          hi = h.ranges()[0].lo;
        } else {
          hi = src_[pos_++];
        }
        if (hi < *lo) fail("class range out of order");
        set.add(*lo, hi);
      } else {
        set.add(item);
      }
    }
    return negate ? set.complement() : set;
  }

  Node parse_group() {
    ++pos_;  // (
    if (!at_end() && peek() == U'?') {
      ++pos_;
      if (at_end()) fail("truncated group");
      if (peek() == U':') {
        ++pos_;
      } else if (peek() == U'P' || peek() == U'<') {
        if (peek() == U'P') ++pos_;
        if (at_end() || peek() != U'<') fail("malformed named group");
        ++pos_;
        std::u32string name;
        while (!at_end() && peek() != U'>') name.push_back(src_[pos_++]);
        if (at_end() || name.empty()) fail("malformed group name");
        ++pos_;
        group_names.push_back(utf8::encode(name));
      } else {
        fail("unsupported group construct");
      }
    }
    Node inner = parse_alt();
    if (at_end() || peek() != U')') fail("missing ')'");
    ++pos_;
    return inner;
  }

  Node parse_atom() {
    const char32_t c = peek();
    switch (c) {
      case U'(': return parse_group();
      case U'[': return set_node(parse_class());
      case U'.': ++pos_; return set_node(CharSet::single(U'\n').complement());
      case U'\\': return set_node(parse_escape());
      case U'*':
      case U'+':
      case U'?': fail("quantifier without operand");
      case U'^':
      case U'$': fail("anchors are not supported (matching is always full-string)");
      default: ++pos_; return set_node(CharSet::single(c));
    }
  }

  std::u32string src_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Thompson NFA
// ---------------------------------------------------------------------------

struct Nfa {
  struct Edge {
    int set;  // index into sets
    int to;
  };
  std::vector<std::vector<int>> eps;
  std::vector<std::vector<Edge>> edges;
  std::vector<CharSet> sets;

  int add_state() {
    eps.emplace_back();
    edges.emplace_back();
    return static_cast<int>(eps.size()) - 1;
  }
};

struct Frag {
  int in;
  int out;
};

Frag build(Nfa& nfa, const Node& n) {
  switch (n.kind) {
    case Node::Kind::kEmpty: {
      const int s = nfa.add_state();
      return {s, s};
    }
    case Node::Kind::kSet: {
      const int a = nfa.add_state();
      const int b = nfa.add_state();
      nfa.sets.push_back(n.set);
      nfa.edges[a].push_back({static_cast<int>(nfa.sets.size()) - 1, b});
      return {a, b};
    }
    case Node::Kind::kConcat: {
      if (n.kids.empty()) {
        const int s = nfa.add_state();
        return {s, s};
      }
      Frag f = build(nfa, n.kids[0]);
      for (std::size_t i = 1; i < n.kids.size(); ++i) {
        Frag g = build(nfa, n.kids[i]);
        nfa.eps[f.out].push_back(g.in);
        f.out = g.out;
      }
      return f;
    }
    case Node::Kind::kAlt: {
      const int a = nfa.add_state();
      const int b = nfa.add_state();
      for (const Node& k : n.kids) {
        Frag g = build(nfa, k);
        nfa.eps[a].push_back(g.in);
        nfa.eps[g.out].push_back(b);
      }
      return {a, b};
    }
    case Node::Kind::kRepeat: {
      const Node& body = n.kids[0];
      const int start = nfa.add_state();
      int cur = start;
      for (int i = 0; i < n.min; ++i) {
        Frag g = build(nfa, body);
        nfa.eps[cur].push_back(g.in);
        cur = g.out;
      }
      const int end = nfa.add_state();
      if (n.max == kUnbounded) {
        Frag g = build(nfa, body);
        nfa.eps[cur].push_back(g.in);
        nfa.eps[g.out].push_back(g.in);
        nfa.eps[g.out].push_back(end);
        nfa.eps[cur].push_back(end);
      } else {
        nfa.eps[cur].push_back(end);
        for (int i = n.min; i < n.max; ++i) {
          Frag g = build(nfa, body);
          nfa.eps[cur].push_back(g.in);
          nfa.eps[g.out].push_back(end);
          cur = g.out;
        }
      }
      return {start, end};
    }
  }
  throw GrammarError("regex: unreachable node kind");
}

void closure(const Nfa& nfa, std::vector<int>& states) {
  std::vector<bool> seen(nfa.eps.size(), false);
  std::vector<int> stack = states;
  for (int s : states) seen[s] = true;
  while (!stack.empty()) {
    const int s = stack.back();
    stack.pop_back();
    for (int t : nfa.eps[s]) {
      if (!seen[t]) {
        seen[t] = true;
        states.push_back(t);
        stack.push_back(t);
      }
    }
  }
  std::sort(states.begin(), states.end());
}

}  // namespace

// ---------------------------------------------------------------------------
// Dfa
// ---------------------------------------------------------------------------

Dfa Dfa::from_regex(std::string_view pattern) {
  auto decoded = utf8::decode(pattern);
  if (!decoded) throw GrammarError("regex: pattern is not valid UTF-8");
  Parser parser(*decoded);
  const Node root = parser.parse();

  Nfa nfa;
  const Frag top = build(nfa, root);

  // Alphabet partition from every range boundary.
  std::set<char32_t> bounds = {0};
  for (const CharSet& s : nfa.sets) {
    for (const auto& r : s.ranges()) {
      bounds.insert(r.lo);
      if (r.hi < utf8::kMaxScalar) bounds.insert(r.hi + 1);
    }
  }
  std::vector<char32_t> starts(bounds.begin(), bounds.end());
  const std::size_t nclass = starts.size();

  // Classes covered by each charset.
  std::vector<std::vector<int>> set_classes(nfa.sets.size());
  for (std::size_t i = 0; i < nfa.sets.size(); ++i) {
    for (std::size_t k = 0; k < nclass; ++k) {
      if (nfa.sets[i].contains(starts[k])) set_classes[i].push_back(static_cast<int>(k));
    }
  }

  std::map<std::vector<int>, State> ids;
  std::vector<std::vector<int>> subsets;
  std::vector<State> table;
  std::deque<State> work;

  auto intern = [&](std::vector<int> subset) -> State {
    auto it = ids.find(subset);
    if (it != ids.end()) return it->second;
    const State id = static_cast<State>(subsets.size());
    ids.emplace(subset, id);
    subsets.push_back(std::move(subset));
    table.resize(subsets.size() * nclass, kDead);
    work.push_back(id);
    return id;
  };

  std::vector<int> init = {top.in};
  closure(nfa, init);
  intern(std::move(init));

  std::vector<std::vector<int>> moves(nclass);
  while (!work.empty()) {
    const State d = work.front();
    work.pop_front();
    for (auto& m : moves) m.clear();
    for (int s : subsets[d]) {
      for (const auto& e : nfa.edges[s]) {
        for (int k : set_classes[e.set]) moves[k].push_back(e.to);
      }
    }
    for (std::size_t k = 0; k < nclass; ++k) {
      if (moves[k].empty()) continue;
      std::vector<int> next = moves[k];
      std::sort(next.begin(), next.end());
      next.erase(std::unique(next.begin(), next.end()), next.end());
      closure(nfa, next);
      const State t = intern(std::move(next));
      table[d * nclass + k] = t;
    }
  }

  const std::size_t n = subsets.size();
  std::vector<bool> accept(n, false);
  for (std::size_t d = 0; d < n; ++d) {
    accept[d] = std::binary_search(subsets[d].begin(), subsets[d].end(), top.out);
  }

  // Keep only states that can still reach acceptance.
  std::vector<std::vector<State>> reverse(n);
  for (std::size_t d = 0; d < n; ++d) {
    for (std::size_t k = 0; k < nclass; ++k) {
      const State t = table[d * nclass + k];
      if (t != kDead) reverse[t].push_back(static_cast<State>(d));
    }
  }
  std::vector<bool> live(n, false);
  std::vector<State> stack;
  for (std::size_t d = 0; d < n; ++d) {
    if (accept[d]) {
      live[d] = true;
      stack.push_back(static_cast<State>(d));
    }
  }
  while (!stack.empty()) {
    const State s = stack.back();
    stack.pop_back();
    for (State p : reverse[s]) {
      if (!live[p]) {
        live[p] = true;
        stack.push_back(p);
      }
    }
  }
  // Renumber in BFS order from the start over live states.
  std::vector<State> remap(n, kDead);
  std::vector<State> order;
  if (live[0]) {
    remap[0] = 0;
    order.push_back(0);
    for (std::size_t i = 0; i < order.size(); ++i) {
      const State d = order[i];
      for (std::size_t k = 0; k < nclass; ++k) {
        const State t = table[d * nclass + k];
        if (t != kDead && live[t] && remap[t] == kDead) {
          remap[t] = static_cast<State>(order.size());
          order.push_back(t);
        }
      }
    }
  }

  Dfa dfa;
  dfa.class_starts_ = std::move(starts);
  dfa.group_names_ = std::move(parser.group_names);
  dfa.start_ = order.empty() ? kDead : 0;
  dfa.accepting_.assign(order.size(), false);
  dfa.table_.assign(order.size() * nclass, kDead);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const State d = order[i];
    dfa.accepting_[i] = accept[d];
    for (std::size_t k = 0; k < nclass; ++k) {
      const State t = table[d * nclass + k];
      dfa.table_[i * nclass + k] = t == kDead ? kDead : remap[t];
    }
  }
  return dfa;
}

std::size_t Dfa::class_of(char32_t c) const {
  auto it = std::upper_bound(class_starts_.begin(), class_starts_.end(), c);
  return static_cast<std::size_t>(it - class_starts_.begin()) - 1;
}

Dfa::State Dfa::step(State s, char32_t c) const {
  if (s == kDead || c > utf8::kMaxScalar) return kDead;
  return table_[static_cast<std::size_t>(s) * class_starts_.size() + class_of(c)];
}

Dfa::State Dfa::run(State s, std::u32string_view input) const {
  for (char32_t c : input) {
    s = step(s, c);
    if (s == kDead) return kDead;
  }
  return s;
}

bool Dfa::matches(std::u32string_view input) const { return accepting(run(start_, input)); }

bool Dfa::matches_utf8(std::string_view input) const {
  auto decoded = utf8::decode(input);
  return decoded && matches(*decoded);
}

json Dfa::to_json() const {
  std::vector<std::uint32_t> starts(class_starts_.begin(), class_starts_.end());
  std::vector<int> accept(accepting_.begin(), accepting_.end());
  return {{"class_starts", starts}, {"table", table_},       {"accepting", accept},
          {"start", start_},        {"groups", group_names_}};
}

Dfa Dfa::from_json(const json& j) {
  Dfa dfa;
  try {
    for (auto v : j.at("class_starts").get<std::vector<std::uint32_t>>()) {
      dfa.class_starts_.push_back(static_cast<char32_t>(v));
    }
    dfa.table_ = j.at("table").get<std::vector<State>>();
    for (int a : j.at("accepting").get<std::vector<int>>()) dfa.accepting_.push_back(a != 0);
    dfa.start_ = j.at("start").get<State>();
    dfa.group_names_ = j.value("groups", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw GrammarError(std::string("dfa json: ") + e.what());
  }
  if (dfa.class_starts_.empty() || dfa.class_starts_[0] != 0 ||
      dfa.table_.size() != dfa.accepting_.size() * dfa.class_starts_.size()) {
    throw GrammarError("dfa json: inconsistent dimensions");
  }
  const auto n = static_cast<State>(dfa.accepting_.size());
  for (State t : dfa.table_) {
    if (t < kDead || t >= n) throw GrammarError("dfa json: transition out of range");
  }
  if (dfa.start_ < kDead || dfa.start_ >= n) throw GrammarError("dfa json: bad start");
  return dfa;
}

}  // namespace cotattr
