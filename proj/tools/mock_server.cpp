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

// Serves a mock table over the HTTP backend protocol.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cotattr/backend.hpp"
#include "cotattr/remote_backend.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Mock model server"};
  std::string table;
  std::string host = "127.0.0.1";
  int port = 8088;
  app.add_option("--table", table, "Mock table JSON")->required()->check(CLI::ExistingFile);
  app.add_option("--host", host, "Bind address");
  app.add_option("--port", port, "Port");
  CLI11_PARSE(app, argc, argv);

  try {
    const cotattr::MockBackend backend = cotattr::MockBackend::load(table);
    cotattr::BackendServer server(backend);
    std::cerr << "serving " << table << " on " << host << ":" << port << "\n";
    if (!server.listen(host, port)) {
      std::cerr << "cannot bind " << host << ":" << port << "\n";
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
