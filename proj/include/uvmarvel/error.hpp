// Copyright 2026 The UVMarvel Authors
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

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace uvmarvel {

enum class ErrorCode {
  InvalidArgument,
  FileNotReadable,
  SyntaxError,
  TopModuleNotFound,
  UnknownFile,
  NoTopModule,
  MixedContext,
  TemplateMissing,
  UnparseableResult,
  UnrecognizedFormat,
  NoItems,
  NoSeedsFound,
  MissingSection,
  DuplicateSection,
  FieldError,
  ProtocolUnsupported,
  LibraryInvalid,
  FrozenRegionViolation,
  LlmUnavailable,
  BudgetTooSmall,
  SimulatorUnavailable,
  EmptyResults,
  ValidationFailed,
};

std::string_view to_string(ErrorCode code);

/// Where in an input file an error was detected. `line` is 1-based; 0 means
/// the error applies to the whole file.
struct ErrorLocation {
  std::string file;
  int line = 0;
};

/// The single exception type thrown by the library. The code identifies the
/// failure class; `details` carries structured extras such as violated
/// region ids.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message,
        std::optional<ErrorLocation> where = std::nullopt,
        std::vector<std::string> details = {});

  ErrorCode code() const noexcept { return code_; }
  const std::optional<ErrorLocation>& where() const noexcept { return where_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  std::optional<ErrorLocation> where_;
  std::vector<std::string> details_;
};

}  // namespace uvmarvel
