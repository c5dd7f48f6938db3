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
#include <string_view>
#include <vector>

namespace cotattr::utf8 {

inline constexpr char32_t kMaxScalar = 0x10FFFF;

// Decodes one scalar starting at `pos`. Returns nullopt on malformed input
// (overlong forms, surrogates, truncated sequences).
std::optional<char32_t> decode_one(std::string_view s, std::size_t& pos);

// Whole-string decode; nullopt if any byte sequence is invalid.
std::optional<std::u32string> decode(std::string_view s);

bool valid(std::string_view s);

void append(std::string& out, char32_t cp);
std::string encode(std::u32string_view s);

}  // namespace cotattr::utf8
