// Copyright 2026 The FedLDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace fedldp {

// Invalid or inconsistent configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Iterates exceeded the divergence guard or became non-finite (exit code 3).
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what)
      : std::runtime_error(what) {}
};

// Malformed input data; carries the 1-based line number (exit code 4).
class ParseError : public std::runtime_error {
 public:
  ParseError(long line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

}  // namespace fedldp
