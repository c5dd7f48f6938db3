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

#include <doctest.h>

#include "cotattr/utf8.hpp"

using namespace cotattr;

TEST_CASE("decode and encode round trip") {
  const std::string s = "a\xc3\xa9\xe3\x80\x82\xf0\x9f\x98\x80";
  const auto d = utf8::decode(s);
  REQUIRE(d);
  CHECK(*d == U"aé。\U0001F600");
  CHECK(utf8::encode(*d) == s);
}

TEST_CASE("malformed sequences are rejected") {
  CHECK_FALSE(utf8::valid("\xff"));
  CHECK_FALSE(utf8::valid("\xc0\xaf"));          // overlong '/'
  CHECK_FALSE(utf8::valid("\xed\xa0\x80"));      // surrogate
  CHECK_FALSE(utf8::valid("\xe3\x80"));          // truncated
  CHECK_FALSE(utf8::valid("\xf4\x90\x80\x80"));  // above U+10FFFF
  CHECK(utf8::valid(""));
}

TEST_CASE("decode_one advances past one scalar") {
  std::size_t pos = 1;
  const auto c = utf8::decode_one("x\xc3\xa9y", pos);
  REQUIRE(c);
  CHECK(*c == U'é');
  CHECK(pos == 3);
}
