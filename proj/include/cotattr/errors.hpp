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

#include <stdexcept>
#include <string>

namespace cotattr {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BackendError : public Error {
 public:
  using Error::Error;
};

// Transport failure talking to a remote backend. Retryable.
class BackendUnreachable : public BackendError {
 public:
  using BackendError::BackendError;
};

class ContextOverflow : public BackendError {
 public:
  using BackendError::BackendError;
};

class CapabilityMissing : public BackendError {
 public:
  using BackendError::BackendError;
};

// Remote peer answered with a payload that violates the wire contract.
class ProtocolError : public BackendError {
 public:
  using BackendError::BackendError;
};

class UnencodableText : public BackendError {
 public:
  using BackendError::BackendError;
};

class GrammarError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class AttributionError : public Error {
 public:
  using Error::Error;
};

class PerturbError : public Error {
 public:
  using Error::Error;
};

class StatsError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cotattr
