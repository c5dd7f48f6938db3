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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cotattr {

// Half-open range [start, end) of input positions sharing a label.
struct LabeledSpan {
  std::string label;
  std::size_t start = 0;
  std::size_t end = 0;
};

// Token-level gradient saliency, laid out [input][output][embedding] in
// row-major order. Input positions cover prompt followed by generation;
// output positions index the generated tokens.
struct SaliencyMatrix {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::size_t width = 0;
  std::vector<double> values;
  std::vector<LabeledSpan> spans;
  std::vector<std::size_t> answer_cols;

  double at(std::size_t i, std::size_t j, std::size_t d) const {
    return values[(i * outputs + j) * width + d];
  }
  double& at(std::size_t i, std::size_t j, std::size_t d) {
    return values[(i * outputs + j) * width + d];
  }

  // Throws DataError on shape mismatch, non-finite values, spans outside the
  // input axis, or answer columns outside the output axis.
  void validate() const;

  // Fixture format: {"shape": [I,O,D], "values": [[[...]]], "spans": [...],
  // "answer_cols": [...]}.
  static SaliencyMatrix from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  // Nested [I][O][D] arrays, as used on the wire and in fixtures.
  static std::vector<double> flatten_nested(const nlohmann::json& nested,
                                            std::size_t inputs,
                                            std::size_t outputs,
                                            std::size_t width);
  nlohmann::json nested_values() const;
};

}  // namespace cotattr
