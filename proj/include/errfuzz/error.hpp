// Copyright 2026 The errfuzz Authors.
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

namespace errfuzz {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Text that could not be read: IR, DOT, constraint or config syntax.
class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& message)
      : Error(format(line, column, message)), line_(line), column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  static std::string format(int line, int column, const std::string& message) {
    std::string out = "line " + std::to_string(line);
    if (column > 0) out += ", column " + std::to_string(column);
    return out + ": " + message;
  }

  int line_;
  int column_;
};

// Well-formed input that violates a structural rule (unknown label, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Query against a block that does not belong to the graph.
class GraphError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Raised by the scheduler state machine for events in the wrong phase.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace errfuzz
