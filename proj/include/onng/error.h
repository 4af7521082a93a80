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

#ifndef ONNG_ERROR_H_
#define ONNG_ERROR_H_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace onng {

enum class ErrorCode {
  kUnterminatedComment,
  kUnterminatedLiteral,
  kInvalidUtf8,
  kMalformedDeclaration,
  kCyclicDependency,
  kUnresolvedReference,
  kDomainError,
  kCollisionExhaustion,
  kIndexOutOfRange,
  kMalformedResponse,
  kMissingField,
  kTimeout,
  kAuthFailure,
  kRateLimited,
  kTransportError,
  kMalformedCandidate,
  kToolchainMissing,
  kEmptyGroup,
  kDegenerateInput,
  kConfigError,
  kIoError,
};

std::string_view error_code_name(ErrorCode code);

// Every failure the library reports is an Error carrying a machine-readable
// code. Lexer and parser errors also carry the byte offset into the source.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message,
        std::optional<std::size_t> offset = std::nullopt);

  ErrorCode code() const { return code_; }
  const std::optional<std::size_t>& offset() const { return offset_; }
  // The message without the code and offset prefix.
  const std::string& message() const { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
  std::optional<std::size_t> offset_;
};

}  // namespace onng

#endif  // ONNG_ERROR_H_
