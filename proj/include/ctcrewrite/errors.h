// Copyright (c) 2026 The ctcrewrite Authors
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

#ifndef CTCREWRITE_ERRORS_H_
#define CTCREWRITE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace ctcrewrite {

// Base class for every error raised by the library. The CLI maps
// ConfigError to exit code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration: missing files, symbol table mismatches, invalid
// parameters, resources that do not cover the input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

class CyclicInputError : public Error {
 public:
  using Error::Error;
};

class BudgetExceededError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

class InventoryError : public Error {
 public:
  using Error::Error;
};

// Violated internal invariant (a bug, not bad input).
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ctcrewrite

#endif  // CTCREWRITE_ERRORS_H_
