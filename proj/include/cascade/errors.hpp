// Copyright 2026 The Privacy Cascade Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace cascade {

/// Base class for all errors raised by the cascade library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file or JSON payload. Carries the offending location
/// (line number or record id) in the message.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A record, memory entry, or parameter file violated an invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Bad or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A remote backend failed after exhausting its retry budget.
class BackendError : public Error {
 public:
  using Error::Error;
};

}  // namespace cascade
