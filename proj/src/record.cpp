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

#include "cotattr/record.hpp"

#include "cotattr/errors.hpp"

namespace cotattr {

using nlohmann::json;

std::string make_record_id(const std::string& language, SetupId setup,
                           const std::string& problem_id) {
  return language + "/" + to_string(setup) + "/" + problem_id;
}

json GenerationRecord::to_json() const {
  json j = {{"id", id},
            {"problem_id", problem_id},
            {"language", language},
            {"setup", to_string(setup)},
            {"prompt", prompt},
            {"output", output},
            {"finish_reason", to_string(finish)},
            {"compliant", parsed.compliant},
            {"preamble", parsed.preamble},
            {"steps", parsed.steps},
            {"answer_lead", parsed.answer_lead},
            {"answer_text", parsed.answer_text},
            {"terminator", parsed.terminator},
            {"answer", parsed.answer ? json(*parsed.answer) : json(nullptr)},
            {"gold", gold},
            {"correct", correct()},
            {"prompt_tokens", prompt_tokens},
            {"output_tokens", output_tokens},
            {"config_hash", config_hash},
            {"seed", seed}};
  if (error) j["error"] = *error;
  return j;
}

GenerationRecord GenerationRecord::from_json(const json& j) {
  GenerationRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    r.problem_id = j.at("problem_id").get<std::string>();
    r.language = j.at("language").get<std::string>();
    r.setup = setup_from_string(j.at("setup").get<std::string>());
    r.prompt = j.at("prompt").get<std::string>();
    r.output = j.at("output").get<std::string>();
    r.finish = finish_reason_from_string(j.at("finish_reason").get<std::string>());
    r.parsed.compliant = j.at("compliant").get<bool>();
    r.parsed.preamble = j.value("preamble", std::string());
    r.parsed.steps = j.value("steps", std::vector<std::string>{});
    r.parsed.answer_lead = j.value("answer_lead", std::string());
    r.parsed.answer_text = j.value("answer_text", std::string());
    r.parsed.terminator = j.value("terminator", std::string());
    if (j.contains("answer") && !j["answer"].is_null()) {
      r.parsed.answer = j["answer"].get<std::int64_t>();
    }
    r.gold = j.at("gold").get<std::int64_t>();
    r.prompt_tokens = j.value("prompt_tokens", std::size_t{0});
    r.output_tokens = j.value("output_tokens", std::size_t{0});
    r.config_hash = j.value("config_hash", std::string());
    r.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("error")) r.error = j["error"].get<std::string>();
  } catch (const json::exception& e) {
    throw DataError(std::string("generation record: ") + e.what());
  }
  return r;
}

}  // namespace cotattr
