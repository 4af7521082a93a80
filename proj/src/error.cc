//
// Copyright 2026 The ONNG Authors
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
//

#include "onng/error.h"

#include <utility>

namespace onng {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnterminatedComment: return "UnterminatedComment";
    case ErrorCode::kUnterminatedLiteral: return "UnterminatedLiteral";
    case ErrorCode::kInvalidUtf8: return "InvalidUtf8";
    case ErrorCode::kMalformedDeclaration: return "MalformedDeclaration";
    case ErrorCode::kCyclicDependency: return "CyclicDependency";
    case ErrorCode::kUnresolvedReference: return "UnresolvedReference";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kCollisionExhaustion: return "CollisionExhaustion";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kMalformedResponse: return "MalformedResponse";
    case ErrorCode::kMissingField: return "MissingField";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kAuthFailure: return "AuthFailure";
    case ErrorCode::kRateLimited: return "RateLimited";
    case ErrorCode::kTransportError: return "TransportError";
    case ErrorCode::kMalformedCandidate: return "MalformedCandidate";
    case ErrorCode::kToolchainMissing: return "ToolchainMissing";
    case ErrorCode::kEmptyGroup: return "EmptyGroup";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string decorate(ErrorCode code, const std::string& message,
                     const std::optional<std::size_t>& offset) {
  std::string out(error_code_name(code));
  if (offset) out += " at byte " + std::to_string(*offset);
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, std::string message,
             std::optional<std::size_t> offset)
    : std::runtime_error(decorate(code, message, offset)),
      code_(code),
      message_(std::move(message)),
      offset_(offset) {}

}  // namespace onng
