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

#include "cotattr/evalstats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "cotattr/errors.hpp"
#include "report_util.hpp"

namespace cotattr {

MeanSe mean_se(std::span<const double> xs) {
  if (xs.empty()) throw StatsError("mean of an empty sample");
  MeanSe out;
  out.n = xs.size();
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(out.n);
  if (out.n < 2) return out;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  const double sd = std::sqrt(ss / static_cast<double>(out.n - 1));
  out.se = sd / std::sqrt(static_cast<double>(out.n));
  return out;
}

namespace {

std::size_t count_correct(std::span<const GenerationRecord> records,
                          std::span<const Problem> problems) {
  std::map<std::string, std::int64_t> gold;
  for (const auto& p : problems) gold[p.id] = p.gold;
  std::set<std::string> seen;
  std::size_t correct = 0;
  for (const auto& r : records) {
    auto it = gold.find(r.problem_id);
    if (it == gold.end()) throw StatsError("record for unknown problem '" + r.problem_id + "'");
    if (!seen.insert(r.problem_id).second) {
      throw StatsError("duplicate record for problem '" + r.problem_id + "'");
    }
    if (r.parsed.answer && *r.parsed.answer == it->second) ++correct;
  }
  return correct;
}

}  // namespace

double accuracy(std::span<const GenerationRecord> records, std::span<const Problem> problems) {
  const std::size_t correct = count_correct(records, problems);
  if (problems.empty()) return 0.0;
  return static_cast<double>(correct) / static_cast<double>(problems.size());
}

std::optional<double> parsed_ratio(std::span<const GenerationRecord> records) {
  if (records.empty()) return std::nullopt;
  std::size_t ok = 0;
  for (const auto& r : records) ok += r.compliant() ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(records.size());
}

LengthStats length_stats(std::span<const GenerationRecord> records) {
  if (records.empty()) throw StatsError("length statistics need at least one record");
  std::vector<double> tokens;
  std::vector<double> steps;
  for (const auto& r : records) {
    tokens.push_back(static_cast<double>(r.output_tokens));
    steps.push_back(static_cast<double>(r.parsed.steps.size()));
  }
  return {mean_se(tokens), mean_se(steps)};
}

double normalized_position(std::size_t i, std::size_t n) {
  if (n == 0 || i >= n) {
    throw StatsError("step index " + std::to_string(i) + " out of range for " +
                     std::to_string(n) + " steps");
  }
  if (n == 1) return 1.0;
  return static_cast<double>(i) / static_cast<double>(n - 1);
}

std::string to_string(StepCategory c) {
  switch (c) {
    case StepCategory::kFirst: return "First";
    case StepCategory::kIntermediate: return "Intermediate";
    case StepCategory::kFinal: return "Final";
  }
  return "?";
}

StepCategory top_step_category(std::span<const double> coefficients) {
  if (coefficients.empty()) throw StatsError("no coefficients");
  std::size_t best = 0;
  for (std::size_t i = 1; i < coefficients.size(); ++i) {
    if (coefficients[i] >= coefficients[best]) best = i;
  }
  if (best + 1 == coefficients.size()) return StepCategory::kFinal;
  if (best == 0) return StepCategory::kFirst;
  return StepCategory::kIntermediate;
}

SlopeFit fit_slope(std::span<const Point> points) {
  if (points.size() < 2) throw StatsError("slope fit needs at least two points");
  const auto n = static_cast<double>(points.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& p : points) {
    mx += p.x;
    my += p.y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& p : points) {
    sxx += (p.x - mx) * (p.x - mx);
    sxy += (p.x - mx) * (p.y - my);
  }
  if (sxx == 0.0) throw StatsError("slope fit needs two distinct x values");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.n = points.size();
  return f;
}

RunSummary summarize(const std::string& language, SetupId setup,
                     std::span<const GenerationRecord> records,
                     std::span<const Problem> problems) {
  RunSummary s;
  s.language = language;
  s.setup = setup;
  s.n = problems.size();
  s.correct = count_correct(records, problems);
  s.accuracy = s.n ? static_cast<double>(s.correct) / static_cast<double>(s.n) : 0.0;
  s.generations = records.size();
  for (const auto& r : records) s.parsed += r.compliant() ? 1 : 0;
  // Compliance only has meaning under a grammar.
  if (uses_grammar(setup)) s.parsed_ratio = parsed_ratio(records);
  if (!records.empty()) s.lengths = length_stats(records);
  return s;
}

std::vector<CategoryCounts> category_histogram(std::span<const AttributionRow> rows) {
  std::vector<CategoryCounts> out;
  for (const auto& r : rows) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const CategoryCounts& c) { return c.language == r.language; });
    if (it == out.end()) {
      out.push_back({r.language, {}});
      it = out.end() - 1;
    }
    ++it->counts[static_cast<std::size_t>(top_step_category(r.coefficients))];
  }
  return out;
}

namespace {

std::optional<SlopeFit> try_fit(const std::vector<Point>& pts) {
  try {
    return fit_slope(pts);
  } catch (const StatsError&) {
    return std::nullopt;
  }
}

}  // namespace

std::vector<SlopeRow> slope_table(std::span<const AttributionRow> rows) {
  std::vector<std::string> langs;
  for (const auto& r : rows) {
    if (std::find(langs.begin(), langs.end(), r.language) == langs.end()) {
      langs.push_back(r.language);
    }
  }
  std::vector<SlopeRow> out;
  for (const char* scale : {"raw", "normalized"}) {
    const bool norm = std::string_view(scale) == "normalized";
    for (const auto& lang : langs) {
      SlopeRow row{lang, scale, {}, {}, std::nullopt, std::nullopt};
      for (const auto& r : rows) {
        if (r.language != lang) continue;
        const auto& c = norm ? r.normalized : r.coefficients;
        auto& pts = r.correct ? row.correct_points : row.incorrect_points;
        for (std::size_t i = 0; i < c.size(); ++i) {
          pts.push_back({normalized_position(i, c.size()), c[i]});
        }
      }
      row.correct = try_fit(row.correct_points);
      row.incorrect = try_fit(row.incorrect_points);
      out.push_back(std::move(row));
    }
  }
  return out;
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", fraction * 100.0);
  return buf;
}

namespace {

using report::num;

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : ""; }

std::string accuracy_csv(const Report& r) {
  std::string out = report::csv_row({"language", "setup", "n", "correct", "accuracy", "accuracy_pct"});
  for (const auto& s : r.summaries) {
    out += report::csv_row({s.language, to_string(s.setup), std::to_string(s.n),
                            std::to_string(s.correct), num(s.accuracy), format_percent(s.accuracy)});
  }
  return out;
}

std::string compliance_csv(const Report& r) {
  std::string out =
      report::csv_row({"language", "setup", "generations", "parsed", "parsed_ratio"});
  for (const auto& s : r.summaries) {
    out += report::csv_row({s.language, to_string(s.setup), std::to_string(s.generations),
                            std::to_string(s.parsed), opt_num(s.parsed_ratio)});
  }
  return out;
}

std::string lengths_csv(const Report& r) {
  std::string out = report::csv_row({"language", "setup", "n", "mean_tokens", "se_tokens",
                                     "mean_steps", "se_steps", "single_sample"});
  for (const auto& s : r.summaries) {
    if (!s.lengths) {
      out += report::csv_row({s.language, to_string(s.setup), "0", "", "", "", "", ""});
      continue;
    }
    const auto& l = *s.lengths;
    out += report::csv_row({s.language, to_string(s.setup), std::to_string(l.tokens.n),
                            num(l.tokens.mean), num(l.tokens.se), num(l.steps.mean),
                            num(l.steps.se), l.tokens.single() ? "true" : "false"});
  }
  return out;
}

std::string categories_csv(const Report& r) {
  std::string out = report::csv_row({"language", "First", "Intermediate", "Final", "total"});
  for (const auto& c : r.categories) {
    out += report::csv_row({c.language, std::to_string(c.counts[0]), std::to_string(c.counts[1]),
                            std::to_string(c.counts[2]), std::to_string(c.total())});
  }
  return out;
}

std::string slopes_csv(const Report& r) {
  std::string out = report::csv_row({"Scale", "Language", "Slope (Correct)", "Slope (Incorrect)",
                                     "N (Correct)", "N (Incorrect)"});
  auto slope = [](const std::optional<SlopeFit>& f) { return f ? num(f->slope) : ""; };
  for (const auto& s : r.slopes) {
    out += report::csv_row({s.scale, s.language, slope(s.correct), slope(s.incorrect),
                            std::to_string(s.correct_points.size()),
                            std::to_string(s.incorrect_points.size())});
  }
  return out;
}

// Grouped vertical bars: one group per label, one bar per series.
struct BarChart {
  std::string title;
  std::vector<std::string> groups;
  std::vector<std::string> series;
  std::vector<std::vector<double>> values;  // [group][series]
  std::vector<std::vector<double>> errors;  // optional, same shape
  double y_max = 1.0;
  bool stacked = false;
};

std::string render_bars(const BarChart& c) {
  const double left = 60;
  const double top = 40;
  const double plot_h = 220;
  const double group_w = c.stacked ? 50 : 30.0 * static_cast<double>(std::max<std::size_t>(c.series.size(), 1)) + 20;
  const double plot_w = group_w * static_cast<double>(std::max<std::size_t>(c.groups.size(), 1));
  report::Svg svg(left + plot_w + 160, top + plot_h + 50);
  svg.text(left, 20, c.title, "start", 13);
  svg.line(left, top + plot_h, left + plot_w, top + plot_h, "#333333");
  svg.line(left, top, left, top + plot_h, "#333333");
  const double y_max = c.y_max > 0 ? c.y_max : 1.0;
  for (int t = 0; t <= 4; ++t) {
    const double v = y_max * t / 4.0;
    const double y = top + plot_h - plot_h * t / 4.0;
    svg.line(left - 4, y, left, y, "#333333");
    svg.text(left - 6, y + 4, num(v, 3), "end", 9);
  }
  auto ypos = [&](double v) { return top + plot_h - plot_h * std::clamp(v / y_max, 0.0, 1.0); };
  for (std::size_t g = 0; g < c.groups.size(); ++g) {
    const double gx = left + group_w * static_cast<double>(g);
    double base = 0.0;
    for (std::size_t s = 0; s < c.series.size(); ++s) {
      const double v = c.values[g][s];
      if (c.stacked) {
        const double y0 = ypos(base);
        const double y1 = ypos(base + v);
        svg.rect(gx + 10, y1, group_w - 20, y0 - y1, report::palette(s));
        base += v;
        continue;
      }
      const double x = gx + 10 + 30.0 * static_cast<double>(s);
      const double y = ypos(v);
      svg.rect(x, y, 26, top + plot_h - y, report::palette(s));
      if (!c.errors.empty()) {
        const double e = c.errors[g][s];
        svg.line(x + 13, ypos(v - e), x + 13, ypos(v + e), "#000000");
      }
    }
    svg.text(gx + group_w / 2, top + plot_h + 16, c.groups[g], "middle", 10);
  }
  for (std::size_t s = 0; s < c.series.size(); ++s) {
    const double y = top + 14.0 * static_cast<double>(s);
    svg.rect(left + plot_w + 16, y, 10, 10, report::palette(s));
    svg.text(left + plot_w + 30, y + 9, c.series[s], "start", 10);
  }
  return svg.str();
}

double nice_max(double v) {
  if (!(v > 0)) return 1.0;
  const double p = std::pow(10.0, std::floor(std::log10(v)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * p >= v) return m * p;
  }
  return 10.0 * p;
}

std::vector<std::string> unique_languages(const std::vector<RunSummary>& s) {
  std::vector<std::string> out;
  for (const auto& x : s) {
    if (std::find(out.begin(), out.end(), x.language) == out.end()) out.push_back(x.language);
  }
  return out;
}

std::vector<SetupId> unique_setups(const std::vector<RunSummary>& s) {
  std::vector<SetupId> out;
  for (const auto& x : s) {
    if (std::find(out.begin(), out.end(), x.setup) == out.end()) out.push_back(x.setup);
  }
  return out;
}

const RunSummary* find_summary(const Report& r, const std::string& lang, SetupId setup) {
  for (const auto& s : r.summaries) {
    if (s.language == lang && s.setup == setup) return &s;
  }
  return nullptr;
}

std::string summary_chart(const Report& r, const std::string& title,
                          double (*value)(const RunSummary&),
                          double (*error)(const RunSummary&), bool fixed_unit) {
  BarChart c;
  c.title = title;
  c.groups = unique_languages(r.summaries);
  const auto setups = unique_setups(r.summaries);
  for (auto s : setups) c.series.push_back(to_string(s));
  double top = 0.0;
  for (const auto& lang : c.groups) {
    std::vector<double> vals;
    std::vector<double> errs;
    for (auto setup : setups) {
      const auto* s = find_summary(r, lang, setup);
      vals.push_back(s ? value(*s) : 0.0);
      errs.push_back(s && error ? error(*s) : 0.0);
      top = std::max(top, vals.back() + errs.back());
    }
    c.values.push_back(vals);
    if (error) c.errors.push_back(errs);
  }
  c.y_max = fixed_unit ? 1.0 : nice_max(top);
  return render_bars(c);
}

std::string categories_chart(const Report& r) {
  BarChart c;
  c.title = "Top-attributed step category";
  c.series = {"First", "Intermediate", "Final"};
  c.stacked = true;
  for (const auto& cat : r.categories) {
    c.groups.push_back(cat.language);
    std::vector<double> shares;
    for (std::size_t k = 0; k < 3; ++k) {
      shares.push_back(cat.total() ? static_cast<double>(cat.counts[k]) /
                                         static_cast<double>(cat.total())
                                   : 0.0);
    }
    c.values.push_back(shares);
  }
  return render_bars(c);
}

std::string slope_scatter(const Report& r, const std::string& scale) {
  std::vector<const SlopeRow*> rows;
  for (const auto& s : r.slopes) {
    if (s.scale == scale) rows.push_back(&s);
  }
  const double panel = 200;
  const double pad = 40;
  report::Svg svg(pad + (panel + pad) * static_cast<double>(std::max<std::size_t>(rows.size(), 1)),
                  panel + 2 * pad + 20);
  svg.text(pad, 18, "Step importance vs normalized position (" + scale + ")", "start", 13);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& row = *rows[k];
    double lo = 0.0;
    double hi = 0.0;
    for (const auto* pts : {&row.correct_points, &row.incorrect_points}) {
      for (const auto& p : *pts) {
        lo = std::min(lo, p.y);
        hi = std::max(hi, p.y);
      }
    }
    if (hi <= lo) hi = lo + 1.0;
    const double x0 = pad + (panel + pad) * static_cast<double>(k);
    const double y0 = pad;
    auto px = [&](double x) { return x0 + panel * x; };
    auto py = [&](double y) { return y0 + panel - panel * (y - lo) / (hi - lo); };
    svg.rect(x0, y0, panel, panel, "none", "#999999");
    svg.text(x0 + panel / 2, y0 - 6, row.language, "middle", 11);
    svg.text(x0, y0 + panel + 14, "0", "middle", 9);
    svg.text(x0 + panel, y0 + panel + 14, "1", "middle", 9);
    svg.text(x0 - 4, py(hi) + 4, num(hi, 3), "end", 9);
    svg.text(x0 - 4, py(lo) + 4, num(lo, 3), "end", 9);
    const std::pair<const std::vector<Point>*, const std::optional<SlopeFit>*> strata[] = {
        {&row.correct_points, &row.correct}, {&row.incorrect_points, &row.incorrect}};
    for (std::size_t s = 0; s < 2; ++s) {
      for (const auto& p : *strata[s].first) svg.circle(px(p.x), py(p.y), 2.5, report::palette(s));
      if (const auto& fit = *strata[s].second) {
        svg.line(px(0), py(fit->intercept), px(1), py(fit->intercept + fit->slope),
                 report::palette(s), 1.5);
      }
    }
  }
  svg.text(pad, panel + 2 * pad + 14, "correct", "start", 10);
  svg.circle(pad - 8, panel + 2 * pad + 10, 3, report::palette(0));
  svg.text(pad + 70, panel + 2 * pad + 14, "incorrect", "start", 10);
  svg.circle(pad + 62, panel + 2 * pad + 10, 3, report::palette(1));
  return svg.str();
}

}  // namespace

void emit_report(const Report& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "plots", ec);
  if (ec) throw Error("cannot create report directory " + dir.string() + ": " + ec.message());
  report::write_file(dir / "accuracy.csv", accuracy_csv(r));
  report::write_file(dir / "compliance.csv", compliance_csv(r));
  report::write_file(dir / "lengths.csv", lengths_csv(r));
  report::write_file(dir / "categories.csv", categories_csv(r));
  report::write_file(dir / "slopes.csv", slopes_csv(r));

  report::write_file(
      dir / "plots" / "accuracy.svg",
      summary_chart(r, "Accuracy", [](const RunSummary& s) { return s.accuracy; }, nullptr, true));
  report::write_file(
      dir / "plots" / "compliance.svg",
      summary_chart(r, "Parsed ratio",
                    [](const RunSummary& s) { return s.parsed_ratio.value_or(0.0); }, nullptr,
                    true));
  report::write_file(
      dir / "plots" / "tokens.svg",
      summary_chart(
          r, "Mean output tokens",
          [](const RunSummary& s) { return s.lengths ? s.lengths->tokens.mean : 0.0; },
          [](const RunSummary& s) { return s.lengths ? s.lengths->tokens.se : 0.0; }, false));
  report::write_file(
      dir / "plots" / "steps.svg",
      summary_chart(
          r, "Mean reasoning steps",
          [](const RunSummary& s) { return s.lengths ? s.lengths->steps.mean : 0.0; },
          [](const RunSummary& s) { return s.lengths ? s.lengths->steps.se : 0.0; }, false));
  report::write_file(dir / "plots" / "categories.svg", categories_chart(r));
  report::write_file(dir / "plots" / "slopes_raw.svg", slope_scatter(r, "raw"));
  report::write_file(dir / "plots" / "slopes_normalized.svg", slope_scatter(r, "normalized"));
}

}  // namespace cotattr
