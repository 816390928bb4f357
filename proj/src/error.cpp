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

#include "uvmarvel/error.hpp"

namespace uvmarvel {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::FileNotReadable: return "FileNotReadable";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::TopModuleNotFound: return "TopModuleNotFound";
    case ErrorCode::UnknownFile: return "UnknownFile";
    case ErrorCode::NoTopModule: return "NoTopModule";
    case ErrorCode::MixedContext: return "MixedContext";
    case ErrorCode::TemplateMissing: return "TemplateMissing";
    case ErrorCode::UnparseableResult: return "UnparseableResult";
    case ErrorCode::UnrecognizedFormat: return "UnrecognizedFormat";
    case ErrorCode::NoItems: return "NoItems";
    case ErrorCode::NoSeedsFound: return "NoSeedsFound";
    case ErrorCode::MissingSection: return "MissingSection";
    case ErrorCode::DuplicateSection: return "DuplicateSection";
    case ErrorCode::FieldError: return "FieldError";
    case ErrorCode::ProtocolUnsupported: return "ProtocolUnsupported";
    case ErrorCode::LibraryInvalid: return "LibraryInvalid";
    case ErrorCode::FrozenRegionViolation: return "FrozenRegionViolation";
    case ErrorCode::LlmUnavailable: return "LlmUnavailable";
    case ErrorCode::BudgetTooSmall: return "BudgetTooSmall";
    case ErrorCode::SimulatorUnavailable: return "SimulatorUnavailable";
    case ErrorCode::EmptyResults: return "EmptyResults";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
  }
  return "Unknown";
}

namespace {

std::string decorate(std::string_view message,
                     const std::optional<ErrorLocation>& where) {
  if (!where) return std::string(message);
  std::string out = where->file;
  if (where->line > 0) out += ":" + std::to_string(where->line);
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, std::string message,
             std::optional<ErrorLocation> where,
             std::vector<std::string> details)
    : std::runtime_error(decorate(message, where)),
      code_(code),
      where_(std::move(where)),
      details_(std::move(details)) {}

}  // namespace uvmarvel
