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

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cotattr/prompt.hpp"
#include "cotattr/record.hpp"

namespace cotattr {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // sample stdev (n - 1 denominator) / sqrt(n); 0 when n == 1
  std::size_t n = 0;

  bool single() const { return n == 1; }
};

// Throws StatsError on an empty sample.
MeanSe mean_se(std::span<const double> xs);

// Fraction of problems whose record carries an answer equal to the gold
// value. Problems without a record count as wrong. A record whose problem id
// is unknown, or two records for one problem, throw StatsError.
double accuracy(std::span<const GenerationRecord> records, std::span<const Problem> problems);

// Grammar-compliant records / all records; empty for zero records.
std::optional<double> parsed_ratio(std::span<const GenerationRecord> records);

struct LengthStats {
  MeanSe tokens;
  MeanSe steps;
};

// Output token counts and step counts. Throws StatsError on zero records.
LengthStats length_stats(std::span<const GenerationRecord> records);

// i / (n - 1), or 1.0 for a single step.
double normalized_position(std::size_t i, std::size_t n);

enum class StepCategory { kFirst, kIntermediate, kFinal };
std::string to_string(StepCategory c);

// Category of the largest coefficient; ties go to the later step.
StepCategory top_step_category(std::span<const double> coefficients);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t n = 0;
};

// Ordinary least squares. Throws StatsError unless x takes at least two
// distinct values.
SlopeFit fit_slope(std::span<const Point> points);

struct RunSummary {
  std::string language;
  SetupId setup = SetupId::kCotStruct;
  std::size_t n = 0;  // problems
  std::size_t correct = 0;
  double accuracy = 0.0;
  std::optional<double> parsed_ratio;
  std::size_t parsed = 0;
  std::size_t generations = 0;
  std::optional<LengthStats> lengths;
};

RunSummary summarize(const std::string& language, SetupId setup,
                     std::span<const GenerationRecord> records, std::span<const Problem> problems);

// One attributed generation, joined with its correctness.
struct AttributionRow {
  std::string language;
  bool correct = false;
  std::vector<double> coefficients;
  std::vector<double> normalized;
};

struct CategoryCounts {
  std::string language;
  std::array<std::size_t, 3> counts{};  // First, Intermediate, Final

  std::size_t total() const { return counts[0] + counts[1] + counts[2]; }
};

// One entry per language in order of first appearance.
std::vector<CategoryCounts> category_histogram(std::span<const AttributionRow> rows);

struct SlopeRow {
  std::string language;
  std::string scale;  // "raw" or "normalized"
  std::vector<Point> correct_points;
  std::vector<Point> incorrect_points;
  std::optional<SlopeFit> correct;    // empty when the stratum is degenerate
  std::optional<SlopeFit> incorrect;
};

// (normalized position, coefficient) pairs per language, stratum and scale.
std::vector<SlopeRow> slope_table(std::span<const AttributionRow> rows);

struct Report {
  std::vector<RunSummary> summaries;
  std::vector<CategoryCounts> categories;
  std::vector<SlopeRow> slopes;
};

// "59.2%".
std::string format_percent(double fraction);

// accuracy.csv, compliance.csv, lengths.csv, categories.csv, slopes.csv and
// plots/*.svg under `dir`. Output bytes depend only on `report`.
void emit_report(const Report& report, const std::filesystem::path& dir);

}  // namespace cotattr
