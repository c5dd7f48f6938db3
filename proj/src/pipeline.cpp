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

#include "cotattr/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <exception>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "cotattr/errors.hpp"
#include "cotattr/evalstats.hpp"
#include "cotattr/record.hpp"
#include "cotattr/remote_backend.hpp"
#include "cotattr/toml_lite.hpp"

namespace cotattr {

using nlohmann::json;
namespace fs = std::filesystem;

const char* const kVersion = "0.3.0";

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw ConfigError("unknown key '" + k + "' in " + where);
    }
  }
}

template <typename T>
T get_as(const json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " is missing or has the wrong type");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::string rel(const fs::path& p, const fs::path& base) {
  const auto r = p.lexically_relative(base);
  return (r.empty() ? p : r).generic_string();
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t stage_seed, std::string_view id) {
  // splitmix64 finalizer over the mixed inputs.
  std::uint64_t z = stage_seed ^ fnv1a(id);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RunConfig RunConfig::from_json(const json& j, const fs::path& base_dir) {
  check_keys(j, {"backend", "languages", "setups", "grammar", "grammar_cache", "decode",
                 "ablation", "seed", "workers", "output_dir", "perturb"},
             "config");
  RunConfig c;
  c.base_dir_ = base_dir;
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j, "seed", "config");
  c.decode_seed = c.seed;
  c.ablation.seed = c.seed;

  if (!j.contains("backend")) throw ConfigError("config.backend is required");
  const json& b = j["backend"];
  check_keys(b, {"kind", "table", "url", "timeout_seconds"}, "backend");
  c.backend.kind = get_as<std::string>(b, "kind", "backend");
  if (c.backend.kind == "mock") {
    c.backend.table = resolve(base_dir, get_as<std::string>(b, "table", "backend"));
  } else if (c.backend.kind == "remote") {
    c.backend.url = get_as<std::string>(b, "url", "backend");
    if (b.contains("timeout_seconds")) {
      c.backend.timeout_seconds = get_as<int>(b, "timeout_seconds", "backend");
    }
  } else {
    throw ConfigError("backend.kind must be 'mock' or 'remote'");
  }

  if (!j.contains("languages") || !j["languages"].is_array() || j["languages"].empty()) {
    throw ConfigError("config.languages must be a non-empty array");
  }
  for (const auto& l : j["languages"]) {
    check_keys(l, {"code", "config", "dataset"}, "languages[]");
    LanguageSpec s;
    s.code = get_as<std::string>(l, "code", "languages[]");
    if (l.contains("config")) s.config = resolve(base_dir, get_as<std::string>(l, "config", "languages[]"));
    s.dataset = resolve(base_dir, get_as<std::string>(l, "dataset", "languages[]"));
    c.languages.push_back(std::move(s));
  }

  if (j.contains("setups")) {
    c.setups.clear();
    for (const auto& s : j["setups"]) {
      if (!s.is_string()) throw ConfigError("setups must be strings");
      try {
        c.setups.push_back(setup_from_string(s.get<std::string>()));
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    }
  }
  if (j.contains("grammar")) c.grammar = get_as<std::string>(j, "grammar", "config");
  if (j.contains("grammar_cache")) {
    c.grammar_cache = resolve(base_dir, get_as<std::string>(j, "grammar_cache", "config"));
  }

  if (j.contains("decode")) {
    const json& d = j["decode"];
    check_keys(d, {"max_new_tokens", "mode", "seed"}, "decode");
    if (d.contains("max_new_tokens")) {
      c.budget.max_new_tokens = get_as<std::size_t>(d, "max_new_tokens", "decode");
    }
    if (d.contains("mode")) {
      const auto mode = get_as<std::string>(d, "mode", "decode");
      if (mode != "greedy" && mode != "sample") {
        throw ConfigError("decode.mode must be 'greedy' or 'sample'");
      }
      c.sample = mode == "sample";
    }
    if (d.contains("seed")) c.decode_seed = get_as<std::uint64_t>(d, "seed", "decode");
  }

  if (j.contains("ablation")) {
    const json& a = j["ablation"];
    check_keys(a, {"n_ablations", "keep_probability", "seed", "lambda", "folds", "grid",
                   "max_attempts"},
               "ablation");
    if (a.contains("n_ablations")) c.ablation.n_ablations = get_as<std::size_t>(a, "n_ablations", "ablation");
    if (a.contains("keep_probability")) {
      c.ablation.keep_probability = get_as<double>(a, "keep_probability", "ablation");
    }
    if (a.contains("seed")) c.ablation.seed = get_as<std::uint64_t>(a, "seed", "ablation");
    if (a.contains("max_attempts")) c.ablation.max_attempts = get_as<int>(a, "max_attempts", "ablation");
    if (a.contains("lambda")) {
      const json& l = a["lambda"];
      if (l.is_string() && l.get<std::string>() == "cv") {
        c.ablation.lambda_rule = LambdaRule::cross_validated();
      } else if (l.is_number()) {
        c.ablation.lambda_rule = LambdaRule::fixed(l.get<double>());
      } else {
        throw ConfigError("ablation.lambda must be \"cv\" or a number");
      }
    }
    if (a.contains("folds")) c.ablation.lambda_rule.folds = get_as<std::size_t>(a, "folds", "ablation");
    if (a.contains("grid")) c.ablation.lambda_rule.grid = get_as<std::size_t>(a, "grid", "ablation");
  }

  if (j.contains("workers")) c.workers = get_as<std::size_t>(j, "workers", "config");
  if (j.contains("output_dir")) c.output_dir = resolve(base_dir, get_as<std::string>(j, "output_dir", "config"));
  else c.output_dir = resolve(base_dir, "out");

  if (j.contains("perturb")) {
    const json& p = j["perturb"];
    check_keys(p, {"language", "dataset", "overrides", "kinds"}, "perturb");
    PerturbRunSpec s;
    s.language = get_as<std::string>(p, "language", "perturb");
    if (p.contains("dataset")) s.dataset = resolve(base_dir, get_as<std::string>(p, "dataset", "perturb"));
    if (p.contains("overrides")) s.overrides = resolve(base_dir, get_as<std::string>(p, "overrides", "perturb"));
    if (p.contains("kinds")) {
      s.kinds.clear();
      for (const auto& k : p["kinds"]) {
        try {
          s.kinds.push_back(perturb_kind_from_string(k.get<std::string>()));
        } catch (const std::exception& e) {
          throw ConfigError(std::string("perturb.kinds: ") + e.what());
        }
      }
    }
    c.perturb = std::move(s);
  }
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  return apply_overrides(read_config_json(path), path.parent_path(), {});
}

json read_config_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto ext = path.extension().string();
  if (ext == ".toml") return parse_toml(text);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    if (ext == ".json") throw ConfigError("config " + path.string() + ": " + e.what());
    return parse_toml(text);
  }
}

json RunConfig::canonical() const {
  json langs = json::array();
  for (const auto& l : languages) {
    langs.push_back({{"code", l.code},
                     {"config", l.config ? json(rel(*l.config, base_dir_)) : json(nullptr)},
                     {"dataset", rel(l.dataset, base_dir_)}});
  }
  json setup_names = json::array();
  for (auto s : setups) setup_names.push_back(to_string(s));
  json backend_j = {{"kind", backend.kind}};
  if (backend.kind == "mock") backend_j["table"] = rel(backend.table, base_dir_);
  else backend_j["url"] = backend.url;
  json lambda = ablation.lambda_rule.kind == LambdaRule::Kind::kFixed
                    ? json(ablation.lambda_rule.value)
                    : json("cv");
  json out = {
      {"backend", backend_j},
      {"languages", langs},
      {"setups", setup_names},
      {"grammar", grammar},
      {"decode",
       {{"max_new_tokens", budget.max_new_tokens},
        {"mode", sample ? "sample" : "greedy"},
        {"seed", decode_seed}}},
      {"ablation",
       {{"n_ablations", ablation.n_ablations},
        {"keep_probability", ablation.keep_probability},
        {"seed", ablation.seed},
        {"lambda", lambda},
        {"folds", ablation.lambda_rule.folds},
        {"grid", ablation.lambda_rule.grid}}},
      {"seed", seed},
  };
  if (perturb) {
    json kinds = json::array();
    for (auto k : perturb->kinds) kinds.push_back(to_string(k));
    out["perturb"] = {
        {"language", perturb->language},
        {"dataset", perturb->dataset ? json(rel(*perturb->dataset, base_dir_)) : json(nullptr)},
        {"overrides",
         perturb->overrides ? json(rel(*perturb->overrides, base_dir_)) : json(nullptr)},
        {"kinds", kinds}};
  }
  return out;
}

std::string RunConfig::hash() const { return hex16(fnv1a(canonical().dump())); }

void RunConfig::validate() const {
  auto must_exist = [](const fs::path& p, const std::string& what) {
    if (!fs::exists(p)) throw ConfigError(what + " not found: " + p.string());
  };
  if (backend.kind == "mock") must_exist(backend.table, "mock table");
  if (backend.kind == "remote" && backend.url.empty()) throw ConfigError("backend.url is empty");
  std::set<std::string> codes;
  for (const auto& l : languages) {
    if (!codes.insert(l.code).second) throw ConfigError("language '" + l.code + "' listed twice");
    if (l.config) {
      must_exist(*l.config, "language config");
    } else if (l.code != "en") {
      throw ConfigError("language '" + l.code + "' needs a config file");
    }
    must_exist(l.dataset, "dataset");
  }
  if (setups.empty()) throw ConfigError("no setups selected");
  if (grammar != "auto") {
    try {
      (void)template_from_string(grammar);
    } catch (const Error& e) {
      throw ConfigError(std::string("grammar: ") + e.what());
    }
  }
  if (budget.max_new_tokens == 0) throw ConfigError("decode.max_new_tokens must be positive");
  if (!(ablation.keep_probability > 0.0 && ablation.keep_probability < 1.0)) {
    throw ConfigError("ablation.keep_probability must lie in (0, 1)");
  }
  if (ablation.n_ablations < 2) throw ConfigError("ablation.n_ablations must be at least 2");
  if (ablation.lambda_rule.kind == LambdaRule::Kind::kFixed && !(ablation.lambda_rule.value >= 0.0)) {
    throw ConfigError("ablation.lambda must be non-negative");
  }
  if (workers == 0) throw ConfigError("workers must be positive");
  if (perturb) {
    if (perturb->overrides) must_exist(*perturb->overrides, "override file");
    if (perturb->dataset) {
      must_exist(*perturb->dataset, "perturb dataset");
    } else if (!codes.count(perturb->language)) {
      throw ConfigError("perturb.language '" + perturb->language +
                        "' is not configured and perturb.dataset is absent");
    }
  }
}

RunConfig apply_overrides(const json& raw, const fs::path& base_dir, const CliOverrides& o) {
  json j = raw;
  if (o.seed) j["seed"] = *o.seed;
  RunConfig c = RunConfig::from_json(j, base_dir);
  if (o.workers) c.workers = *o.workers;
  if (o.out) c.output_dir = *o.out;
  return c;
}

std::unique_ptr<Backend> make_backend(const RunConfig& config) {
  if (config.backend.kind == "mock") {
    return std::make_unique<MockBackend>(MockBackend::load(config.backend.table));
  }
  RemoteOptions opts;
  opts.timeout_seconds = config.backend.timeout_seconds;
  return std::make_unique<RemoteBackend>(config.backend.url, opts);
}

LanguageConfig load_language(const LanguageSpec& spec) {
  LanguageConfig lang;
  if (spec.config) {
    lang = LanguageConfig::load(*spec.config);
  } else if (spec.code == "en") {
    lang = LanguageConfig::english();
  } else {
    throw ConfigError("language '" + spec.code + "' needs a config file");
  }
  if (lang.code != spec.code) {
    throw ConfigError("language config " + (spec.config ? spec.config->string() : "") +
                      " declares code '" + lang.code + "', expected '" + spec.code + "'");
  }
  return lang;
}

// ---------------------------------------------------------------------------
// JSON-Lines

std::vector<json> read_jsonl(const fs::path& path) {
  std::vector<json> rows;
  std::ifstream in(path, std::ios::binary);
  if (!in) return rows;
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) break;  // torn tail
    const std::string_view line(text.data() + start, nl - start);
    start = nl + 1;
    if (line.empty()) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw DataError(path.string() + ": corrupt row: " + e.what());
    }
  }
  return rows;
}

JsonlWriter::JsonlWriter(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  if (fs::exists(path)) {
    // Drop a partially written last row left by an interrupted run.
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    if (!text.empty() && text.back() != '\n') {
      const std::size_t keep = text.rfind('\n') == std::string::npos ? 0 : text.rfind('\n') + 1;
      in.close();
      fs::resize_file(path, keep);
    }
  }
  out_.open(path, std::ios::binary | std::ios::app);
  if (!out_) throw Error("cannot open " + path.string() + " for appending");
}

void JsonlWriter::write(const json& row) {
  // Byte-level tokens can leave unconstrained output as invalid UTF-8.
  out_ << row.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  out_.flush();
  if (!out_) throw Error("write failed");
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json load_manifest(const RunConfig& config) {
  const RunPaths paths{config.output_dir};
  std::ifstream in(paths.manifest());
  if (in) {
    try {
      json m = json::parse(in);
      if (m.is_object()) return m;
    } catch (const json::parse_error&) {
    }
  }
  return json::object();
}

void save_manifest(const RunConfig& config, const json& m) {
  const RunPaths paths{config.output_dir};
  fs::create_directories(paths.root);
  std::ofstream out(paths.manifest(), std::ios::binary | std::ios::trunc);
  out << m.dump(2) << '\n';
}

}  // namespace

void manifest_begin(const RunConfig& config, const std::string& stage) {
  json m = load_manifest(config);
  m["config_hash"] = config.hash();
  m["version"] = kVersion;
  m["config"] = config.canonical();
  json& s = m["stages"][stage];
  s["started"] = utc_now();
  s["finished"] = nullptr;
  s["status"] = "running";
  save_manifest(config, m);
}

void manifest_finish(const RunConfig& config, const std::string& stage, const StageResult& r) {
  json m = load_manifest(config);
  json& s = m["stages"][stage];
  s["finished"] = utc_now();
  s["status"] = r.failures ? "partial" : "ok";
  s["total"] = r.total;
  s["written"] = r.written;
  s["skipped"] = r.skipped;
  s["failures"] = r.failures;
  if (stage == "generate") s["seed"] = config.decode_seed;
  if (stage == "attribute") s["seed"] = config.ablation.seed;
  save_manifest(config, m);
}

// ---------------------------------------------------------------------------
// Stages

namespace {

// Runs fn(i) for i in [0, n) on up to `workers` threads; the first exception
// is rethrown after all threads finish.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::min(std::max<std::size_t>(workers, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// Computes rows in parallel chunks and appends them in item order.
template <typename Fn>
void ordered_batches(std::size_t n, std::size_t workers, JsonlWriter& writer, Fn&& make_row) {
  const std::size_t chunk = std::max<std::size_t>(workers, 1) * 8;
  for (std::size_t begin = 0; begin < n; begin += chunk) {
    const std::size_t end = std::min(n, begin + chunk);
    std::vector<std::optional<json>> rows(end - begin);
    parallel_for(end - begin, workers, [&](std::size_t k) { rows[k] = make_row(begin + k); });
    for (auto& r : rows) {
      if (r) writer.write(*r);
    }
  }
}

std::set<std::string> existing_ids(const fs::path& path) {
  std::set<std::string> ids;
  for (const auto& row : read_jsonl(path)) {
    if (row.contains("id") && row["id"].is_string()) ids.insert(row["id"].get<std::string>());
  }
  return ids;
}

TemplateId template_for(const RunConfig& config, SetupId setup) {
  if (!uses_grammar(setup)) return TemplateId::kNone;
  if (config.grammar == "auto") return default_template(setup);
  return template_from_string(config.grammar);
}

struct WorkItem {
  std::size_t lang;
  SetupId setup;
  const Problem* problem;
  std::string id;
};

}  // namespace

StageResult run_generate(const RunConfig& config, const Backend& backend) {
  const RunPaths paths{config.output_dir};
  const std::string hash = config.hash();

  std::vector<LanguageConfig> langs;
  std::vector<std::vector<Problem>> datasets;
  for (const auto& spec : config.languages) {
    langs.push_back(load_language(spec));
    datasets.push_back(load_dataset(spec.dataset, spec.code));
  }

  // Compile every grammar up front; decoding threads share them read-only.
  std::map<std::pair<std::size_t, TemplateId>, TokenMaskIndex> grammars;
  for (std::size_t l = 0; l < langs.size(); ++l) {
    for (auto setup : config.setups) {
      const TemplateId t = template_for(config, setup);
      if (t == TemplateId::kNone || grammars.count({l, t})) continue;
      grammars.emplace(std::pair{l, t},
                       build_grammar(GrammarTemplate{t}, langs[l], backend.vocab(),
                                     config.grammar_cache));
    }
  }

  const auto done = existing_ids(paths.generations());
  StageResult result;
  std::vector<WorkItem> items;
  for (std::size_t l = 0; l < langs.size(); ++l) {
    for (auto setup : config.setups) {
      for (const auto& p : datasets[l]) {
        ++result.total;
        std::string id = make_record_id(langs[l].code, setup, p.id);
        if (done.count(id)) {
          ++result.skipped;
          continue;
        }
        items.push_back({l, setup, &p, std::move(id)});
      }
    }
  }

  JsonlWriter writer(paths.generations());
  std::atomic<std::size_t> failures{0};
  ordered_batches(items.size(), config.workers, writer, [&](std::size_t i) -> std::optional<json> {
    const WorkItem& w = items[i];
    const LanguageConfig& lang = langs[w.lang];
    GenerationRecord rec;
    rec.id = w.id;
    rec.problem_id = w.problem->id;
    rec.language = lang.code;
    rec.setup = w.setup;
    rec.gold = w.problem->gold;
    rec.config_hash = hash;
    rec.seed = derive_seed(config.decode_seed, w.id);
    try {
      const PromptBundle bundle = build_prompt(*w.problem, w.setup, lang);
      rec.prompt = bundle.text;
      const TokenSeq prompt = backend.tokenize(bundle.text);
      rec.prompt_tokens = prompt.size();
      const TemplateId t = template_for(config, w.setup);
      const TokenMaskIndex* mask = t == TemplateId::kNone ? nullptr : &grammars.at({w.lang, t});
      const DecodeMode mode = config.sample ? DecodeMode::sampled(rec.seed) : DecodeMode::greedy();
      const Generation gen = constrained_generate(backend, mask, prompt, config.budget, mode);
      rec.output = gen.text;
      rec.output_tokens = gen.tokens.size();
      rec.finish = gen.finish;
      if (t == TemplateId::kCot) {
        rec.parsed = parse_structured(gen.text, lang, mask->dfa());
      } else if (t == TemplateId::kAnswerOnly) {
        rec.parsed = parse_answer_only(gen.text, lang, mask->dfa());
      } else {
        rec.parsed = parse_unstructured(gen.text);
      }
    } catch (const Error& e) {
      rec.error = e.what();
      ++failures;
      std::cerr << "generate: " << w.id << ": " << e.what() << "\n";
    }
    return rec.to_json();
  });
  result.written = items.size();
  result.failures = failures;
  return result;
}

StageResult run_attribute(const RunConfig& config, const Backend& backend) {
  const RunPaths paths{config.output_dir};
  if (!fs::exists(paths.generations())) {
    throw Error("attribute: " + paths.generations().string() + " is missing; run generate first");
  }
  const std::string hash = config.hash();
  std::vector<GenerationRecord> eligible;
  StageResult result;
  const auto done = existing_ids(paths.attributions());
  for (const auto& row : read_jsonl(paths.generations())) {
    GenerationRecord r = GenerationRecord::from_json(row);
    ++result.total;
    if (r.error || !r.compliant() || r.parsed.steps.empty() || done.count(r.id)) {
      ++result.skipped;
      continue;
    }
    eligible.push_back(std::move(r));
  }
  if (eligible.empty() && done.empty()) {
    std::cerr << "attribute: warning: no compliant generations with reasoning steps\n";
  }

  JsonlWriter writer(paths.attributions());
  std::atomic<std::size_t> failures{0};
  ordered_batches(eligible.size(), config.workers, writer,
                  [&](std::size_t i) -> std::optional<json> {
                    const GenerationRecord& rec = eligible[i];
                    AblationConfig ac = config.ablation;
                    ac.seed = derive_seed(config.ablation.seed, rec.id);
                    ac.workers = 1;
                    try {
                      json row = attribute_record(backend, rec, ac).to_json();
                      row["config_hash"] = hash;
                      return row;
                    } catch (const Error& e) {
                      ++failures;
                      std::cerr << "attribute: " << rec.id << ": " << e.what() << "\n";
                      return std::nullopt;
                    }
                  });
  result.failures = failures;
  result.written = eligible.size() - result.failures;
  return result;
}

StageResult run_perturb(const RunConfig& config) {
  if (!config.perturb) throw ConfigError("config has no [perturb] section");
  const PerturbRunSpec& spec = *config.perturb;
  const RunPaths paths{config.output_dir};

  LanguageSpec lang_spec{spec.language, std::nullopt, {}};
  for (const auto& l : config.languages) {
    if (l.code == spec.language) lang_spec = l;
  }
  if (spec.dataset) lang_spec.dataset = *spec.dataset;
  const LanguageConfig lang = load_language(lang_spec);
  const auto problems = load_dataset(lang_spec.dataset, lang.code);
  const OverrideMap overrides = spec.overrides ? load_overrides(*spec.overrides) : OverrideMap{};

  StageResult result;
  json failures = json::array();
  fs::create_directories(paths.perturb_dir());
  for (auto kind : spec.kinds) {
    std::string out;
    for (std::size_t i = 0; i < problems.size(); ++i) {
      const Problem& p = problems[i];
      ++result.total;
      try {
        const Perturbed r = perturb(kind, p, lang, overrides, i);
        const json row = {{"id", p.id},
                          {"language", p.language},
                          {"question", r.question},
                          {"answer", p.gold},
                          {"original_question", p.question},
                          {"perturbation", r.spec.to_json()},
                          {"config_hash", config.hash()}};
        out += row.dump() + "\n";
        ++result.written;
      } catch (const PerturbError& e) {
        ++result.failures;
        failures.push_back({{"id", p.id}, {"kind", to_string(kind)}, {"error", e.what()},
                            {"question", p.question}});
      }
    }
    std::ofstream f(paths.perturb_dir() / (to_string(kind) + ".jsonl"),
                    std::ios::binary | std::ios::trunc);
    f << out;
  }
  std::ofstream f(paths.perturb_dir() / "failures.json", std::ios::binary | std::ios::trunc);
  f << failures.dump(2) << '\n';
  return result;
}

StageResult run_report(const RunConfig& config) {
  const RunPaths paths{config.output_dir};
  if (!fs::exists(paths.generations())) {
    throw Error("report: " + paths.generations().string() + " is missing; run generate first");
  }
  std::vector<GenerationRecord> records;
  for (const auto& row : read_jsonl(paths.generations())) {
    records.push_back(GenerationRecord::from_json(row));
  }

  Report report;
  StageResult result;
  for (const auto& spec : config.languages) {
    const auto problems = load_dataset(spec.dataset, spec.code);
    for (auto setup : config.setups) {
      std::vector<GenerationRecord> subset;
      for (const auto& r : records) {
        if (r.language == spec.code && r.setup == setup) subset.push_back(r);
      }
      report.summaries.push_back(summarize(spec.code, setup, subset, problems));
      result.total += subset.size();
    }
  }

  std::map<std::string, const GenerationRecord*> by_id;
  for (const auto& r : records) by_id[r.id] = &r;
  std::vector<AttributionRow> rows;
  if (!fs::exists(paths.attributions())) {
    std::cerr << "report: notice: no attributions; categories and slopes are empty\n";
  } else {
    for (const auto& row : read_jsonl(paths.attributions())) {
      const AttributionResult a = AttributionResult::from_json(row);
      auto it = by_id.find(a.id);
      if (it == by_id.end()) {
        ++result.failures;
        std::cerr << "report: attribution for unknown generation " << a.id << "\n";
        continue;
      }
      rows.push_back({it->second->language, it->second->correct(), a.coefficients, a.normalized()});
    }
  }
  report.categories = category_histogram(rows);
  report.slopes = slope_table(rows);
  emit_report(report, paths.report_dir());
  result.written = report.summaries.size();
  return result;
}

}  // namespace cotattr
