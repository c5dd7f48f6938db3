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
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cotattr/backend.hpp"
#include "cotattr/grammar.hpp"
#include "cotattr/perturb.hpp"
#include "cotattr/prompt.hpp"
#include "cotattr/step_attrib.hpp"

namespace cotattr {

struct BackendSpec {
  std::string kind = "mock";  // "mock" or "remote"
  std::filesystem::path table;
  std::string url;
  int timeout_seconds = 120;
};

struct LanguageSpec {
  std::string code;
  std::optional<std::filesystem::path> config;  // built-in English when absent
  std::filesystem::path dataset;
};

struct PerturbRunSpec {
  std::string language;
  std::optional<std::filesystem::path> dataset;  // the language's dataset when absent
  std::optional<std::filesystem::path> overrides;
  std::vector<PerturbKind> kinds = {PerturbKind::kNegation, PerturbKind::kDistractor};
};

// Declarative run description. Relative paths are resolved against the
// directory holding the config file.
struct RunConfig {
  BackendSpec backend;
  std::vector<LanguageSpec> languages;
  std::vector<SetupId> setups = {SetupId::kCotStruct};
  std::string grammar = "auto";  // auto | cot | answer-only | none
  std::optional<std::filesystem::path> grammar_cache;
  DecodeBudget budget;
  bool sample = false;
  std::uint64_t seed = 0;
  std::uint64_t decode_seed = 0;
  AblationConfig ablation;
  std::size_t workers = 1;
  std::filesystem::path output_dir = "out";
  std::optional<PerturbRunSpec> perturb;

  // Unspecified stage seeds follow `seed`. Paths are resolved against
  // `base_dir`.
  static RunConfig from_json(const nlohmann::json& j,
                             const std::filesystem::path& base_dir = ".");
  // JSON when the file parses as JSON, otherwise the TOML subset.
  static RunConfig load(const std::filesystem::path& path);

  // Result-affecting settings only; output_dir and workers are left out.
  nlohmann::json canonical() const;
  // 16 hex digits of FNV-1a over canonical().dump().
  std::string hash() const;

  // Throws ConfigError for missing files and inconsistent settings.
  void validate() const;

  std::filesystem::path base_dir_;
};

// Raw config document: .toml files use the TOML subset, .json files JSON,
// anything else whichever parses.
nlohmann::json read_config_json(const std::filesystem::path& path);

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::filesystem::path> out;
};

// Replaces the global seed along with every stage seed the config did not
// pin explicitly.
RunConfig apply_overrides(const nlohmann::json& raw, const std::filesystem::path& base_dir,
                          const CliOverrides& o);

std::unique_ptr<Backend> make_backend(const RunConfig& config);

LanguageConfig load_language(const LanguageSpec& spec);

// Deterministic per-record seed from a stage seed and a record id.
std::uint64_t derive_seed(std::uint64_t stage_seed, std::string_view id);

struct StageResult {
  std::size_t total = 0;    // work items considered
  std::size_t written = 0;  // rows appended this run
  std::size_t skipped = 0;  // already present (resume) or filtered out
  std::size_t failures = 0;
};

// Output layout under config.output_dir.
struct RunPaths {
  std::filesystem::path root;
  std::filesystem::path generations() const { return root / "generations.jsonl"; }
  std::filesystem::path attributions() const { return root / "attributions.jsonl"; }
  std::filesystem::path perturb_dir() const { return root / "perturb"; }
  std::filesystem::path report_dir() const { return root / "report"; }
  std::filesystem::path manifest() const { return root / "manifest.json"; }
};

StageResult run_generate(const RunConfig& config, const Backend& backend);
StageResult run_attribute(const RunConfig& config, const Backend& backend);
StageResult run_perturb(const RunConfig& config);
StageResult run_report(const RunConfig& config);

// manifest.json: config hash, version, and per-stage timestamps and counts.
void manifest_begin(const RunConfig& config, const std::string& stage);
void manifest_finish(const RunConfig& config, const std::string& stage, const StageResult& r);

// JSON-Lines helpers. A torn final line (no trailing newline) is dropped on
// read and cut off before appending.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

class JsonlWriter {
 public:
  explicit JsonlWriter(const std::filesystem::path& path);
  void write(const nlohmann::json& row);

 private:
  std::ofstream out_;
};

extern const char* const kVersion;

}  // namespace cotattr
