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

#include "cotattr/remote_backend.hpp"

#include <cmath>

#include <httplib.h>

#include "cotattr/errors.hpp"

namespace cotattr {

using nlohmann::json;

namespace {

json parse_body(const std::string& body, const std::string& what) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError(what + ": response is not JSON: " + e.what());
  }
}

httplib::Client make_client(const std::string& url, int timeout) {
  httplib::Client cli(url);
  cli.set_connection_timeout(timeout, 0);
  cli.set_read_timeout(timeout, 0);
  cli.set_write_timeout(timeout, 0);
  return cli;
}

}  // namespace

RemoteBackend::RemoteBackend(std::string base_url, RemoteOptions options)
    : base_url_(std::move(base_url)), options_(options) {
  auto cli = make_client(base_url_, options_.timeout_seconds);
  auto res = cli.Get("/v1/vocab");
  if (!res) {
    throw BackendUnreachable("GET " + base_url_ + "/v1/vocab failed: " +
                             httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw ProtocolError("GET /v1/vocab returned HTTP " + std::to_string(res->status));
  }
  const json j = parse_body(res->body, "/v1/vocab");
  try {
    vocab_ = Vocabulary::from_json(j);
  } catch (const DataError& e) {
    throw ProtocolError(std::string("/v1/vocab: ") + e.what());
  }
  context_limit_ = j.value("context_limit", options_.default_context_limit);
  caps_ = {false, false};
  if (j.contains("capabilities")) {
    caps_.supports_logprob_scoring = j["capabilities"].value("logprob_scoring", false);
    caps_.supports_token_saliency = j["capabilities"].value("token_saliency", false);
  }
}

json RemoteBackend::post(const std::string& path, const json& body) const {
  auto cli = make_client(base_url_, options_.timeout_seconds);
  auto res = cli.Post(path, body.dump(), "application/json");
  if (!res) {
    throw BackendUnreachable("POST " + base_url_ + path + " failed: " +
                             httplib::to_string(res.error()));
  }
  if (res->status == 413) throw ContextOverflow("server rejected prefix length");
  if (res->status == 501) throw CapabilityMissing("server does not implement " + path);
  if (res->status >= 500) {
    throw BackendUnreachable(path + " returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw ProtocolError(path + " returned HTTP " + std::to_string(res->status));
  }
  return parse_body(res->body, path);
}

LogitVector RemoteBackend::next_token_logits(std::span<const TokenId> prefix) const {
  check_context(prefix.size());
  const json res = post("/v1/logits", {{"prefix", prefix}});
  if (!res.contains("logits") || !res["logits"].is_array()) {
    throw ProtocolError("/v1/logits: missing logits array");
  }
  const auto& arr = res["logits"];
  if (arr.size() != vocab_.size()) {
    throw ProtocolError("/v1/logits: expected " + std::to_string(vocab_.size()) +
                        " logits, got " + std::to_string(arr.size()));
  }
  LogitVector out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number()) throw ProtocolError("/v1/logits: non-numeric logit");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ProtocolError("/v1/logits: non-finite logit");
    out.push_back(x);
  }
  return out;
}

double RemoteBackend::score_completion(std::span<const TokenId> prefix,
                                       std::span<const TokenId> completion) const {
  if (!caps_.supports_logprob_scoring) return Backend::score_completion(prefix, completion);
  if (completion.empty()) throw BackendError("score_completion: empty completion");
  check_context(prefix.size() + completion.size() - 1);
  const json res = post("/v1/score", {{"prefix", prefix}, {"completion", completion}});
  if (!res.contains("logprob") || !res["logprob"].is_number()) {
    throw ProtocolError("/v1/score: missing logprob");
  }
  const double lp = res["logprob"].get<double>();
  if (!std::isfinite(lp) || lp > 1e-9) {
    throw ProtocolError("/v1/score: logprob must be finite and non-positive");
  }
  return std::min(lp, 0.0);
}

SaliencyMatrix RemoteBackend::token_saliency(std::span<const TokenId> prompt,
                                             std::span<const TokenId> generation) const {
  if (!caps_.supports_token_saliency) {
    throw CapabilityMissing("remote backend does not advertise token saliency");
  }
  const json res = post("/v1/saliency", {{"prompt", prompt}, {"generation", generation}});
  if (!res.contains("matrix") || !res.contains("embed_width")) {
    throw ProtocolError("/v1/saliency: missing matrix or embed_width");
  }
  SaliencyMatrix m;
  m.inputs = prompt.size() + generation.size();
  m.outputs = generation.size();
  m.width = res["embed_width"].get<std::size_t>();
  try {
    m.values = SaliencyMatrix::flatten_nested(res["matrix"], m.inputs, m.outputs, m.width);
    m.validate();
  } catch (const DataError& e) {
    throw ProtocolError(std::string("/v1/saliency: ") + e.what());
  }
  return m;
}

// ---------------------------------------------------------------------------
// BackendServer
// ---------------------------------------------------------------------------

BackendServer::BackendServer(const Backend& backend)
    : backend_(backend), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

BackendServer::~BackendServer() { stop(); }

void BackendServer::install_routes() {
  auto reply = [](httplib::Response& res, const json& body) {
    res.set_content(body.dump(), "application/json");
  };
  // Maps library errors to the status codes the client interprets.
  auto guarded = [reply](auto&& fn) {
    return [fn, reply](const httplib::Request& req, httplib::Response& res) {
      try {
        const json body = req.body.empty() ? json::object() : json::parse(req.body);
        reply(res, fn(body));
      } catch (const ContextOverflow& e) {
        res.status = 413;
        reply(res, {{"error", e.what()}});
      } catch (const CapabilityMissing& e) {
        res.status = 501;
        reply(res, {{"error", e.what()}});
      } catch (const json::exception& e) {
        res.status = 400;
        reply(res, {{"error", e.what()}});
      } catch (const std::exception& e) {
        res.status = 400;
        reply(res, {{"error", e.what()}});
      }
    };
  };

  server_->Get("/v1/vocab", [this, reply](const httplib::Request&, httplib::Response& res) {
    json j = backend_.vocab().to_json();
    j["context_limit"] = backend_.context_limit();
    const auto caps = backend_.capabilities();
    j["capabilities"] = {{"logprob_scoring", caps.supports_logprob_scoring},
                         {"token_saliency", caps.supports_token_saliency}};
    reply(res, j);
  });
  server_->Post("/v1/logits", guarded([this](const json& body) {
    const auto prefix = body.at("prefix").get<TokenSeq>();
    const LogitVector logits = backend_.next_token_logits(prefix);
    json arr = json::array();
    for (double v : logits) arr.push_back(static_cast<float>(v));
    return json{{"logits", arr}};
  }));
  server_->Post("/v1/score", guarded([this](const json& body) {
    const auto prefix = body.at("prefix").get<TokenSeq>();
    const auto completion = body.at("completion").get<TokenSeq>();
    return json{{"logprob", backend_.score_completion(prefix, completion)}};
  }));
  server_->Post("/v1/saliency", guarded([this](const json& body) {
    const auto prompt = body.at("prompt").get<TokenSeq>();
    const auto generation = body.at("generation").get<TokenSeq>();
    const SaliencyMatrix m = backend_.token_saliency(prompt, generation);
    return json{{"matrix", m.nested_values()}, {"embed_width", m.width}};
  }));
}

int BackendServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host)
                              : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw BackendUnreachable("cannot bind " + host);
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

bool BackendServer::listen(const std::string& host, int port) {
  return server_->listen(host, port);
}

void BackendServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace cotattr
