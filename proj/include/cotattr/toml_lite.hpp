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

#include <string_view>

#include <nlohmann/json.hpp>

namespace cotattr {

// Reads the TOML subset used by run configs into JSON: [tables],
// [[arrays of tables]], dotted keys, basic and literal strings, integers,
// floats, booleans, arrays and inline tables. Dates and multi-line strings
// are not supported. Throws ConfigError with a line number.
nlohmann::json parse_toml(std::string_view text);

}  // namespace cotattr
