// Copyright 2026 The qcstruct Authors
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

namespace qcstruct {

/// Domain failure raised by any analysis stage. `stage()` names the operation
/// that failed so that pipeline callers can report where things went wrong.
class Error : public std::runtime_error {
 public:
  Error(std::string stage, const std::string& message, std::string diagnostics = {})
      : std::runtime_error(stage + ": " + message),
        stage_(std::move(stage)),
        message_(message),
        diagnostics_(std::move(diagnostics)) {}

  const std::string& stage() const noexcept { return stage_; }
  const std::string& message() const noexcept { return message_; }
  const std::string& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::string stage_;
  std::string message_;
  std::string diagnostics_;
};

/// Malformed input (files, vectors, flags). Kept apart from Error because the
/// command line maps the two onto different exit codes.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qcstruct
