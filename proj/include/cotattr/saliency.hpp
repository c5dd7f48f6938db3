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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cotattr/backend.hpp"
#include "cotattr/saliency_matrix.hpp"

namespace cotattr {

// Dense [input][output] scores.
struct ScoreGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  ScoreGrid() = default;
  ScoreGrid(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}
  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
};

// Sums the embedding axis: out(i, j) = sum_d m(i, j, d).
ScoreGrid collapse_embedding(const SaliencyMatrix& m);

struct NormalizedGrid {
  ScoreGrid grid;
  // One flag per column; true when the column was all zero and left as is.
  std::vector<bool> zero_column;
};

// Divides every column by its Euclidean norm over the input axis.
NormalizedGrid normalize_columns(const ScoreGrid& grid);

// Per-generation step-by-answer-token importances.
struct StepImportanceTable {
  std::string generation_id;
  std::vector<std::string> row_labels;
  std::vector<std::size_t> answer_cols;
  // rows x answer_cols, row-major.
  std::vector<double> values;
  std::optional<double> answer_probability;
  bool correct = false;
  bool matches_gold = false;

  double at(std::size_t row, std::size_t col) const {
    return values[row * answer_cols.size() + col];
  }
  // Mean over answer columns; the heatmap cell for this generation.
  double row_score(std::size_t row) const;
};

// value(step, answer col) = mean over the span's input positions of the
// grid at that column. Spans must be non-empty, disjoint and inside the
// grid; answer columns inside it. Violations throw DataError.
StepImportanceTable aggregate_steps(const ScoreGrid& grid, std::span<const LabeledSpan> spans,
                                    std::span<const std::size_t> answer_cols);

// collapse -> normalize -> aggregate over the matrix's own spans and answer
// columns.
StepImportanceTable step_importance(const SaliencyMatrix& m);

// Writes `path` (CSV: header "step,<generation ids>", one row per step
// index, blank cells where a generation has fewer steps), `path` with a
// .json extension (answer probabilities, correctness and gold-match flags
// in column order), and, when `svg` is set, `path` with an .svg extension.
void emit_heatmap(std::span<const StepImportanceTable> tables, const std::filesystem::path& path,
                  bool svg = true);

// Output-token indices whose text overlaps the last digit run of the
// detokenized generation.
std::vector<std::size_t> answer_token_indices(const Vocabulary& vocab,
                                              std::span<const TokenId> generation);

}  // namespace cotattr
