// Copyright 2026 The bwv Authors.
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
#include <vector>

namespace bwv {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Arguments violate an operation's preconditions (shapes, ranges, counts).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A value became NaN/Inf, or an operation has no numerically meaningful result.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A persisted file (model container, manifest, labels) is malformed.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Reading or writing a file failed, or a dataset is unusable.
class DataError : public Error {
 public:
  DataError(const std::string& what, std::vector<std::string> items = {})
      : Error(compose(what, items)), items_(std::move(items)) {}

  const std::vector<std::string>& items() const { return items_; }

 private:
  static std::string compose(const std::string& what,
                             const std::vector<std::string>& items) {
    std::string msg = what;
    for (const auto& item : items) msg += "\n  - " + item;
    return msg;
  }

  std::vector<std::string> items_;
};

}  // namespace bwv
