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

#include "cotattr/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <string>
#include <vector>

#include "cotattr/errors.hpp"
#include "cotattr/utf8.hpp"

namespace cotattr {

using nlohmann::json;

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  json parse() {
    json root = json::object();
    json* table = &root;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        table = header(root);
      } else {
        key_value(*table);
      }
      end_of_line();
    }
    return root;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("TOML line " + std::to_string(line_) + ": " + msg);
  }
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[pos_]; }
  char get() {
    if (eof()) fail("unexpected end of input");
    const char c = s_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    get();
  }

  void skip_ws() {
    while (peek() == ' ' || peek() == '\t') get();
  }
  void skip_comment() {
    if (peek() == '#') {
      while (!eof() && peek() != '\n') get();
    }
  }
  // Whitespace, comments and newlines (inside arrays and between entries).
  void skip_blank_lines() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\n' || peek() == '\r') {
        get();
      } else {
        break;
      }
    }
  }
  void end_of_line() {
    skip_ws();
    skip_comment();
    if (peek() == '\r') get();
    if (!eof() && peek() != '\n') fail("trailing characters after value");
  }

  std::string bare_key() {
    std::string k;
    while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-') {
      k += get();
    }
    if (k.empty()) fail("expected a key");
    return k;
  }

  std::vector<std::string> key_path() {
    std::vector<std::string> path;
    while (true) {
      skip_ws();
      if (peek() == '"') {
        path.push_back(basic_string());
      } else if (peek() == '\'') {
        path.push_back(literal_string());
      } else {
        path.push_back(bare_key());
      }
      skip_ws();
      if (peek() != '.') break;
      get();
    }
    return path;
  }

  json* descend(json& root, const std::vector<std::string>& path, std::size_t count) {
    json* t = &root;
    for (std::size_t i = 0; i < count; ++i) {
      json& next = (*t)[path[i]];
      if (next.is_null()) next = json::object();
      if (next.is_array() && !next.empty() && next.back().is_object()) {
        t = &next.back();
      } else if (next.is_object()) {
        t = &next;
      } else {
        fail("key '" + path[i] + "' is not a table");
      }
    }
    return t;
  }

  json* header(json& root) {
    get();
    const bool array = peek() == '[';
    if (array) get();
    const auto path = key_path();
    expect(']');
    if (array) expect(']');
    json* parent = descend(root, path, path.size() - 1);
    json& slot = (*parent)[path.back()];
    if (array) {
      if (slot.is_null()) slot = json::array();
      if (!slot.is_array()) fail("'" + path.back() + "' is not an array of tables");
      slot.push_back(json::object());
      return &slot.back();
    }
    if (slot.is_null()) slot = json::object();
    if (!slot.is_object()) fail("'" + path.back() + "' is not a table");
    return &slot;
  }

  void key_value(json& table) {
    const auto path = key_path();
    skip_ws();
    expect('=');
    skip_ws();
    json* t = descend(table, path, path.size() - 1);
    if (t->contains(path.back())) fail("duplicate key '" + path.back() + "'");
    (*t)[path.back()] = value();
  }

  json value() {
    const char c = peek();
    if (c == '"') return basic_string();
    if (c == '\'') return literal_string();
    if (c == '[') return array();
    if (c == '{') return inline_table();
    if (s_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return true;
    }
    if (s_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return false;
    }
    return number();
  }

  std::string basic_string() {
    expect('"');
    std::string out;
    while (true) {
      const char c = get();
      if (c == '"') break;
      if (c == '\n') fail("newline in string");
      if (c != '\\') {
        out += c;
        continue;
      }
      const char e = get();
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case 'b': out += '\b'; break;
        case 'f': out += '\f'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'u':
        case 'U': {
          const std::size_t n = e == 'u' ? 4 : 8;
          if (pos_ + n > s_.size()) fail("truncated unicode escape");
          std::uint32_t cp = 0;
          auto r = std::from_chars(s_.data() + pos_, s_.data() + pos_ + n, cp, 16);
          if (r.ec != std::errc() || r.ptr != s_.data() + pos_ + n) fail("bad unicode escape");
          pos_ += n;
          if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) fail("invalid code point");
          utf8::append(out, static_cast<char32_t>(cp));
          break;
        }
        default: fail(std::string("unknown escape \\") + e);
      }
    }
    return out;
  }

  std::string literal_string() {
    expect('\'');
    std::string out;
    while (true) {
      const char c = get();
      if (c == '\'') break;
      if (c == '\n') fail("newline in string");
      out += c;
    }
    return out;
  }

  json array() {
    expect('[');
    json out = json::array();
    while (true) {
      skip_blank_lines();
      if (peek() == ']') break;
      out.push_back(value());
      skip_blank_lines();
      if (peek() == ',') {
        get();
        continue;
      }
      if (peek() != ']') fail("expected ',' or ']' in array");
    }
    get();
    return out;
  }

  json inline_table() {
    expect('{');
    json out = json::object();
    skip_ws();
    if (peek() == '}') {
      get();
      return out;
    }
    while (true) {
      key_value(out);
      skip_ws();
      if (peek() == ',') {
        get();
        skip_ws();
        continue;
      }
      expect('}');
      return out;
    }
  }

  json number() {
    const std::size_t b = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' ||
                      peek() == '-' || peek() == '.' || peek() == '_')) {
      ++pos_;
    }
    std::string tok;
    for (char c : s_.substr(b, pos_ - b)) {
      if (c != '_') tok += c;
    }
    if (tok.empty()) fail("expected a value");
    const char* first = tok.data() + (tok[0] == '+' ? 1 : 0);
    const char* last = tok.data() + tok.size();
    if (tok.find_first_of(".eE") == std::string::npos && tok != "inf" && tok != "nan") {
      std::int64_t v = 0;
      auto r = std::from_chars(first, last, v);
      if (r.ec == std::errc() && r.ptr == last) return v;
      fail("bad integer '" + tok + "'");
    }
    double d = 0.0;
    auto r = std::from_chars(first, last, d);
    if (r.ec == std::errc() && r.ptr == last) return d;
    fail("bad number '" + tok + "'");
  }
};

}  // namespace

json parse_toml(std::string_view text) { return Parser(text).parse(); }

}  // namespace cotattr
