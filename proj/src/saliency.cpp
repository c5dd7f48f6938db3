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

#include "cotattr/saliency.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "cotattr/errors.hpp"
#include "cotattr/prompt.hpp"
#include "report_util.hpp"

namespace cotattr {

using nlohmann::json;

ScoreGrid collapse_embedding(const SaliencyMatrix& m) {
  m.validate();
  ScoreGrid g(m.inputs, m.outputs);
  for (std::size_t i = 0; i < m.inputs; ++i) {
    for (std::size_t j = 0; j < m.outputs; ++j) {
      double s = 0.0;
      for (std::size_t d = 0; d < m.width; ++d) s += m.at(i, j, d);
      g(i, j) = s;
    }
  }
  return g;
}

NormalizedGrid normalize_columns(const ScoreGrid& grid) {
  NormalizedGrid out{grid, std::vector<bool>(grid.cols, false)};
  for (std::size_t j = 0; j < grid.cols; ++j) {
    double sq = 0.0;
    for (std::size_t i = 0; i < grid.rows; ++i) sq += grid(i, j) * grid(i, j);
    if (sq == 0.0) {
      out.zero_column[j] = true;
      continue;
    }
    const double norm = std::sqrt(sq);
    for (std::size_t i = 0; i < grid.rows; ++i) out.grid(i, j) = grid(i, j) / norm;
  }
  return out;
}

double StepImportanceTable::row_score(std::size_t row) const {
  if (answer_cols.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t c = 0; c < answer_cols.size(); ++c) s += at(row, c);
  return s / static_cast<double>(answer_cols.size());
}

StepImportanceTable aggregate_steps(const ScoreGrid& grid, std::span<const LabeledSpan> spans,
                                    std::span<const std::size_t> answer_cols) {
  std::vector<bool> used(grid.rows, false);
  for (const auto& s : spans) {
    if (s.start >= s.end || s.end > grid.rows) {
      throw DataError("span '" + s.label + "' does not fit the input axis");
    }
    for (std::size_t i = s.start; i < s.end; ++i) {
      if (used[i]) throw DataError("span '" + s.label + "' overlaps another span");
      used[i] = true;
    }
  }
  for (std::size_t c : answer_cols) {
    if (c >= grid.cols) throw DataError("answer column out of range");
  }

  StepImportanceTable t;
  t.answer_cols.assign(answer_cols.begin(), answer_cols.end());
  t.values.reserve(spans.size() * answer_cols.size());
  for (const auto& s : spans) {
    t.row_labels.push_back(s.label);
    const auto len = static_cast<double>(s.end - s.start);
    for (std::size_t c : answer_cols) {
      double sum = 0.0;
      for (std::size_t i = s.start; i < s.end; ++i) sum += grid(i, c);
      t.values.push_back(sum / len);
    }
  }
  return t;
}

StepImportanceTable step_importance(const SaliencyMatrix& m) {
  const NormalizedGrid n = normalize_columns(collapse_embedding(m));
  return aggregate_steps(n.grid, m.spans, m.answer_cols);
}

void emit_heatmap(std::span<const StepImportanceTable> tables, const std::filesystem::path& path,
                  bool svg) {
  std::size_t max_rows = 0;
  for (const auto& t : tables) max_rows = std::max(max_rows, t.row_labels.size());

  std::vector<std::string> header = {"step"};
  for (const auto& t : tables) header.push_back(t.generation_id);
  std::string csv = report::csv_row(header);
  for (std::size_t r = 0; r < max_rows; ++r) {
    std::vector<std::string> row = {std::to_string(r)};
    for (const auto& t : tables) {
      row.push_back(r < t.row_labels.size() ? report::num(t.row_score(r)) : "");
    }
    csv += report::csv_row(row);
  }
  report::write_file(path, csv);

  json side = json::array();
  for (const auto& t : tables) {
    side.push_back({{"id", t.generation_id},
                    {"answer_probability",
                     t.answer_probability ? json(*t.answer_probability) : json(nullptr)},
                    {"correct", t.correct},
                    {"matches_gold", t.matches_gold},
                    {"rows", t.row_labels}});
  }
  auto side_path = path;
  side_path.replace_extension(".json");
  report::write_file(side_path, json{{"generations", side}}.dump(2) + "\n");

  if (!svg) return;
  const double cell = 36.0;
  const double left = 60.0;
  const double top = 50.0;
  report::Svg doc(left + cell * static_cast<double>(tables.size()) + 20.0,
                  top + cell * static_cast<double>(max_rows) + 30.0);
  for (std::size_t g = 0; g < tables.size(); ++g) {
    const auto& t = tables[g];
    const double x = left + cell * static_cast<double>(g);
    doc.text(x + cell / 2, top - 24, t.generation_id, "middle", 10);
    // Gold marker: filled when the answer matches the reference.
    doc.circle(x + cell / 2, top - 10, 4, t.matches_gold ? "#d4a017" : "#dddddd");
    for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
      const double v = t.row_score(r);
      const double y = top + cell * static_cast<double>(r);
      doc.rect(x, y, cell, cell, report::heat_color(v), "#ffffff");
      doc.text(x + cell / 2, y + cell / 2 + 4, report::num(v, 2), "middle", 9);
    }
  }
  for (std::size_t r = 0; r < max_rows; ++r) {
    doc.text(left - 8, top + cell * static_cast<double>(r) + cell / 2 + 4,
             "step " + std::to_string(r), "end", 10);
  }
  auto svg_path = path;
  svg_path.replace_extension(".svg");
  report::write_file(svg_path, doc.str());
}

std::vector<std::size_t> answer_token_indices(const Vocabulary& vocab,
                                              std::span<const TokenId> generation) {
  std::vector<std::size_t> starts;
  std::string text;
  for (TokenId t : generation) {
    starts.push_back(text.size());
    if (!vocab.is_special(t)) text += vocab.surface(t);
  }
  auto span = find_last_number(text);
  std::vector<std::size_t> out;
  if (!span) return out;
  for (std::size_t k = 0; k < generation.size(); ++k) {
    const std::size_t b = starts[k];
    const std::size_t e = k + 1 < starts.size() ? starts[k + 1] : text.size();
    if (b < span->end && e > span->begin) out.push_back(k);
  }
  return out;
}

}  // namespace cotattr
