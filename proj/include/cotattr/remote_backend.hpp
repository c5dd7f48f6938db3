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

#include <memory>
#include <string>
#include <thread>

#include "cotattr/backend.hpp"

namespace httplib {
class Server;
}

namespace cotattr {

struct RemoteOptions {
  int timeout_seconds = 120;
  // Used when the server's /v1/vocab response omits "context_limit".
  std::size_t default_context_limit = 32768;
};

// HTTP/JSON client for a model served elsewhere.
//
//   GET  /v1/vocab    -> {"tokens": [...], "eot": id, "special": [...],
//                         "context_limit": n, "capabilities": {...}}
//   POST /v1/logits   {"prefix": [...]}             -> {"logits": [...]}
//   POST /v1/score    {"prefix": [...], "completion": [...]} -> {"logprob": x}
//   POST /v1/saliency {"prompt": [...], "generation": [...]}
//                     -> {"matrix": [[[...]]], "embed_width": d}
//
// Tokenization is local longest-match over the served vocabulary. Each call
// opens its own connection, so concurrent use is safe.
class RemoteBackend final : public Backend {
 public:
  explicit RemoteBackend(std::string base_url, RemoteOptions options = {});

  const Vocabulary& vocab() const override { return vocab_; }
  BackendCapabilities capabilities() const override { return caps_; }
  std::size_t context_limit() const override { return context_limit_; }
  LogitVector next_token_logits(std::span<const TokenId> prefix) const override;
  double score_completion(std::span<const TokenId> prefix,
                          std::span<const TokenId> completion) const override;
  SaliencyMatrix token_saliency(std::span<const TokenId> prompt,
                                std::span<const TokenId> generation) const override;

 private:
  nlohmann::json post(const std::string& path, const nlohmann::json& body) const;

  std::string base_url_;
  RemoteOptions options_;
  Vocabulary vocab_;
  BackendCapabilities caps_;
  std::size_t context_limit_ = 0;
};

// Serves any Backend over the same protocol. Used by the mock server tool and
// by the client tests.
class BackendServer {
 public:
  explicit BackendServer(const Backend& backend);
  ~BackendServer();
  BackendServer(const BackendServer&) = delete;
  BackendServer& operator=(const BackendServer&) = delete;

  // Binds (port 0 picks a free port), starts serving on a background thread
  // and returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();
  // Blocks serving on the calling thread.
  bool listen(const std::string& host, int port);

 private:
  void install_routes();

  const Backend& backend_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace cotattr
