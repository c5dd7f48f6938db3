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

#include "cotattr/saliency_matrix.hpp"

#include <cmath>

#include "cotattr/errors.hpp"

namespace cotattr {

using nlohmann::json;

void SaliencyMatrix::validate() const {
  if (values.size() != inputs * outputs * width) {
    throw DataError("saliency matrix: value count " +
                    std::to_string(values.size()) + " does not match shape");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw DataError("saliency matrix: non-finite entry");
  }
  for (const auto& s : spans) {
    if (s.start >= s.end || s.end > inputs) {
      throw DataError("saliency matrix: span '" + s.label +
                      "' outside input axis");
    }
  }
  for (std::size_t c : answer_cols) {
    if (c >= outputs) throw DataError("saliency matrix: answer column out of range");
  }
}

std::vector<double> SaliencyMatrix::flatten_nested(const json& nested,
                                                   std::size_t inputs,
                                                   std::size_t outputs,
                                                   std::size_t width) {
  std::vector<double> flat;
  flat.reserve(inputs * outputs * width);
  if (!nested.is_array() || nested.size() != inputs) {
    throw DataError("saliency values: expected " + std::to_string(inputs) +
                    " input rows");
  }
  for (const auto& row : nested) {
    if (!row.is_array() || row.size() != outputs) {
      throw DataError("saliency values: expected " + std::to_string(outputs) +
                      " output columns");
    }
    for (const auto& cell : row) {
      if (!cell.is_array() || cell.size() != width) {
        throw DataError("saliency values: expected embedding width " +
                        std::to_string(width));
      }
      for (const auto& v : cell) {
        if (!v.is_number()) throw DataError("saliency values: non-numeric entry");
        flat.push_back(v.get<double>());
      }
    }
  }
  return flat;
}

json SaliencyMatrix::nested_values() const {
  json rows = json::array();
  for (std::size_t i = 0; i < inputs; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < outputs; ++j) {
      json cell = json::array();
      for (std::size_t d = 0; d < width; ++d) cell.push_back(at(i, j, d));
      row.push_back(std::move(cell));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

SaliencyMatrix SaliencyMatrix::from_json(const json& j) {
  SaliencyMatrix m;
  try {
    const auto& shape = j.at("shape");
    if (!shape.is_array() || shape.size() != 3) {
      throw DataError("saliency fixture: shape must have three entries");
    }
    m.inputs = shape[0].get<std::size_t>();
    m.outputs = shape[1].get<std::size_t>();
    m.width = shape[2].get<std::size_t>();
    m.values = flatten_nested(j.at("values"), m.inputs, m.outputs, m.width);
    if (j.contains("spans")) {
      for (const auto& s : j["spans"]) {
        m.spans.push_back({s.at("label").get<std::string>(),
                           s.at("start").get<std::size_t>(),
                           s.at("end").get<std::size_t>()});
      }
    }
    if (j.contains("answer_cols")) {
      m.answer_cols = j["answer_cols"].get<std::vector<std::size_t>>();
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("saliency fixture: ") + e.what());
  }
  m.validate();
  return m;
}

json SaliencyMatrix::to_json() const {
  json spans_json = json::array();
  for (const auto& s : spans) {
    spans_json.push_back({{"label", s.label}, {"start", s.start}, {"end", s.end}});
  }
  return {{"shape", {inputs, outputs, width}},
          {"values", nested_values()},
          {"spans", spans_json},
          {"answer_cols", answer_cols}};
}

}  // namespace cotattr
