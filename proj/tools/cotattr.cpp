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

// Command-line driver: generate, attribute, perturb, report, validate-config
// and saliency.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cotattr/errors.hpp"
#include "cotattr/pipeline.hpp"
#include "cotattr/saliency.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cotattr;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kPartial = 2;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> out;
};

RunConfig load_config(const Globals& g) {
  if (g.config.empty()) throw ConfigError("--config is required");
  const fs::path path(g.config);
  CliOverrides o;
  o.seed = g.seed;
  o.workers = g.workers;
  if (g.out) o.out = fs::path(*g.out);
  RunConfig c = apply_overrides(read_config_json(path), path.parent_path(), o);
  c.validate();
  return c;
}

void print_result(const std::string& stage, const StageResult& r) {
  std::cerr << stage << ": " << r.written << " written, " << r.skipped << " skipped, "
            << r.failures << " failed (of " << r.total << ")\n";
}

int stage_exit(const StageResult& r) { return r.failures ? kPartial : kOk; }

int run_stage(const RunConfig& c, const std::string& stage, bool needs_backend,
              StageResult (*with_backend)(const RunConfig&, const Backend&),
              StageResult (*without_backend)(const RunConfig&)) {
  manifest_begin(c, stage);
  StageResult r;
  if (needs_backend) {
    const auto backend = make_backend(c);
    r = with_backend(c, *backend);
  } else {
    r = without_backend(c);
  }
  manifest_finish(c, stage, r);
  print_result(stage, r);
  return stage_exit(r);
}

int cmd_saliency(const std::vector<std::string>& inputs, const std::string& output, bool svg) {
  std::vector<StepImportanceTable> tables;
  for (const auto& in : inputs) {
    std::ifstream f(in);
    if (!f) throw DataError("cannot open " + in);
    const json j = json::parse(f);
    StepImportanceTable t = step_importance(SaliencyMatrix::from_json(j));
    t.generation_id = j.value("id", fs::path(in).stem().string());
    if (j.contains("answer_probability")) t.answer_probability = j["answer_probability"].get<double>();
    t.correct = j.value("correct", false);
    t.matches_gold = j.value("matches_gold", t.correct);
    tables.push_back(std::move(t));
  }
  emit_heatmap(tables, output, svg);
  std::cerr << "saliency: " << tables.size() << " generation(s) -> " << output << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chain-of-thought generation, step attribution and evaluation"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Run config (JSON or TOML)");
  app.add_option("--seed", g.seed, "Override the global seed");
  app.add_option("--workers", g.workers, "Parallel workers")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Override the output directory");
  app.set_version_flag("--version", std::string(kVersion));

  auto* generate = app.add_subcommand("generate", "Generate answers for every problem and setup");
  auto* attribute = app.add_subcommand("attribute", "Attribute answers to reasoning steps");
  auto* perturb_cmd = app.add_subcommand("perturb", "Write negation and distractor datasets");
  std::optional<std::string> kind;
  std::optional<std::string> overrides;
  perturb_cmd->add_option("--kind", kind, "negation or distractor (default: both)")
      ->check(CLI::IsMember({"negation", "distractor"}));
  perturb_cmd->add_option("--overrides", overrides, "Override file")->check(CLI::ExistingFile);
  auto* report = app.add_subcommand("report", "Write statistics tables and plots");
  auto* run_all = app.add_subcommand("run", "generate, attribute and report in sequence");
  auto* validate = app.add_subcommand("validate-config", "Check the config and print its hash");
  auto* saliency = app.add_subcommand("saliency", "Aggregate saliency fixtures into a heatmap");
  std::vector<std::string> sal_inputs;
  std::string sal_output;
  bool no_svg = false;
  saliency->add_option("inputs", sal_inputs, "Saliency fixture files")
      ->required()
      ->check(CLI::ExistingFile);
  saliency->add_option("--output", sal_output, "CSV path (default <out>/saliency/heatmap.csv)");
  saliency->add_flag("--no-svg", no_svg, "Skip the SVG rendering");

  CLI11_PARSE(app, argc, argv);

  try {
    if (saliency->parsed()) {
      if (sal_output.empty()) {
        sal_output = (fs::path(g.out.value_or("out")) / "saliency" / "heatmap.csv").string();
      }
      return cmd_saliency(sal_inputs, sal_output, !no_svg);
    }

    RunConfig c = load_config(g);
    if (validate->parsed()) {
      std::cout << c.hash() << "\n";
      return kOk;
    }
    if (generate->parsed()) return run_stage(c, "generate", true, run_generate, nullptr);
    if (attribute->parsed()) return run_stage(c, "attribute", true, run_attribute, nullptr);
    if (report->parsed()) return run_stage(c, "report", false, nullptr, run_report);
    if (perturb_cmd->parsed()) {
      if (!c.perturb) throw ConfigError("config has no perturb section");
      if (kind) c.perturb->kinds = {perturb_kind_from_string(*kind)};
      if (overrides) c.perturb->overrides = fs::path(*overrides);
      return run_stage(c, "perturb", false, nullptr, run_perturb);
    }
    if (run_all->parsed()) {
      int worst = kOk;
      worst = std::max(worst, run_stage(c, "generate", true, run_generate, nullptr));
      worst = std::max(worst, run_stage(c, "attribute", true, run_attribute, nullptr));
      worst = std::max(worst, run_stage(c, "report", false, nullptr, run_report));
      return worst;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kOk;
}
