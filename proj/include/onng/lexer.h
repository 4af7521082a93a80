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

#ifndef ONNG_LEXER_H_
#define ONNG_LEXER_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace onng {

enum class TokenKind {
  kKeyword,
  kIdentifier,
  kSymbol,
  kLiteral,
  kComment,
  kWhitespace,
};

std::string_view token_kind_name(TokenKind kind);

struct ByteSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct Token {
  TokenKind kind = TokenKind::kWhitespace;
  std::string text;
  ByteSpan span;

  bool is(TokenKind k, std::string_view t) const {
    return kind == k && text == t;
  }
  bool is_trivia() const {
    return kind == TokenKind::kWhitespace || kind == TokenKind::kComment;
  }
  bool is_string_literal() const {
    return kind == TokenKind::kLiteral && !text.empty() && text[0] == '"';
  }
};

// Lossless tokenization of the Lean 4 surface subset used by corpus files and
// candidate proofs. Concatenating every token's text reproduces `source`.
// Throws Error(kUnterminatedComment | kUnterminatedLiteral | kInvalidUtf8).
std::vector<Token> tokenize(std::string_view source);

// Concatenated token text.
std::string render(std::span<const Token> tokens);

bool is_keyword(std::string_view word);

// Words the Lean parser treats as reserved in commands or terms.
const std::vector<std::string>& lean_keywords();

}  // namespace onng

#endif  // ONNG_LEXER_H_
