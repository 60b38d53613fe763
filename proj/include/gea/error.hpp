// Copyright 2026 The Energy Arena Authors.
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
#include <string_view>

namespace gea {

enum class ErrorCode {
  kInvalidConfig,
  kDuplicateFamilyId,
  kDuplicateEnergyRank,
  kFamilyTooSmall,
  kUnknownProvider,
  kEmptyRegistry,
  kInvalidState,
  kEmptyQuestion,
  kAuthError,
  kProviderError,
  kTimeout,
  kPairFailure,
  kIoError,
  kInvalidRecord,
  kMalformedLine,
  kDomainError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kDuplicateFamilyId: return "DuplicateFamilyId";
    case ErrorCode::kDuplicateEnergyRank: return "DuplicateEnergyRank";
    case ErrorCode::kFamilyTooSmall: return "FamilyTooSmall";
    case ErrorCode::kUnknownProvider: return "UnknownProvider";
    case ErrorCode::kEmptyRegistry: return "EmptyRegistry";
    case ErrorCode::kInvalidState: return "InvalidState";
    case ErrorCode::kEmptyQuestion: return "EmptyQuestion";
    case ErrorCode::kAuthError: return "AuthError";
    case ErrorCode::kProviderError: return "ProviderError";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kPairFailure: return "PairFailure";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInvalidRecord: return "InvalidRecord";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kDomainError: return "DomainError";
  }
  return "Unknown";
}

/// Every failure in the library surfaces as an Error carrying one code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gea
