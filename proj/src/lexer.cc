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

#include "onng/lexer.h"

#include <algorithm>
#include <cctype>
#include <array>
#include <unordered_set>

#include "onng/error.h"
#include "onng/unicode.h"

namespace onng {

namespace {

// Longest-first so maximal munch works with a linear scan.
constexpr std::array<std::string_view, 24> kMultiCharSymbols = {
    "<;>", "|>.", ":=", "=>", "->", "<-", "<|>", "<|", "|>", "..", "::",
    "&&", "||", "==", "!=", "<=", ">=", "++", "^^", "%[", "@[", "$>", "<$",
    "##"};

bool is_digit(char32_t cp) { return cp >= '0' && cp <= '9'; }

bool is_space(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r';
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    while (pos_ < src_.size()) lex_one();
    return std::move(tokens_);
  }

 private:
  char32_t peek(std::size_t at, std::size_t* len = nullptr) const {
    char32_t cp = 0;
    const std::size_t n = decode_utf8(src_, at, &cp);
    if (n == 0) {
      if (at >= src_.size()) return 0;
      throw Error(ErrorCode::kInvalidUtf8, "", at);
    }
    if (len) *len = n;
    return cp;
  }

  bool starts_with(std::string_view s) const {
    return src_.substr(pos_, s.size()) == s;
  }

  void emit(TokenKind kind, std::size_t begin, std::size_t end) {
    tokens_.push_back(
        Token{kind, std::string(src_.substr(begin, end - begin)), {begin, end}});
    pos_ = end;
  }

  void lex_one() {
    const std::size_t begin = pos_;
    std::size_t len = 0;
    const char32_t cp = peek(pos_, &len);

    if (is_space(cp)) {
      std::size_t end = pos_;
      while (end < src_.size() && is_space(static_cast<unsigned char>(src_[end])))
        ++end;
      emit(TokenKind::kWhitespace, begin, end);
      return;
    }
    if (starts_with("--")) {
      std::size_t end = src_.find('\n', pos_);
      if (end == std::string_view::npos) end = src_.size();
      emit(TokenKind::kComment, begin, end);
      return;
    }
    if (starts_with("/-")) {
      lex_block_comment(begin);
      return;
    }
    if (cp == '"') {
      lex_string(begin);
      return;
    }
    if (cp == '\'' && lex_char_literal(begin)) return;
    if (is_digit(cp)) {
      lex_number(begin);
      return;
    }
    if (cp == U'«') {
      const std::size_t close = src_.find("»", pos_ + len);
      if (close == std::string_view::npos)
        throw Error(ErrorCode::kUnterminatedLiteral, "escaped identifier", begin);
      emit(TokenKind::kIdentifier, begin, close + std::string_view("»").size());
      return;
    }
    if (is_ident_start(cp)) {
      std::size_t end = pos_ + len;
      std::size_t n = 0;
      while (end < src_.size() && is_ident_rest(peek(end, &n))) end += n;
      const std::string_view word = src_.substr(begin, end - begin);
      emit(is_keyword(word) ? TokenKind::kKeyword : TokenKind::kIdentifier,
           begin, end);
      return;
    }
    for (std::string_view sym : kMultiCharSymbols) {
      if (starts_with(sym)) {
        emit(TokenKind::kSymbol, begin, begin + sym.size());
        return;
      }
    }
    emit(TokenKind::kSymbol, begin, begin + len);
  }

  void lex_block_comment(std::size_t begin) {
    int depth = 0;
    std::size_t at = pos_;
    while (at < src_.size()) {
      if (src_.substr(at, 2) == "/-") {
        ++depth;
        at += 2;
      } else if (src_.substr(at, 2) == "-/") {
        at += 2;
        if (--depth == 0) {
          emit(TokenKind::kComment, begin, at);
          return;
        }
      } else {
        ++at;
      }
    }
    throw Error(ErrorCode::kUnterminatedComment, "block comment", begin);
  }

  void lex_string(std::size_t begin) {
    std::size_t at = pos_ + 1;
    while (at < src_.size()) {
      const char c = src_[at];
      if (c == '\\') {
        at += 2;
      } else if (c == '"') {
        emit(TokenKind::kLiteral, begin, at + 1);
        return;
      } else {
        ++at;
      }
    }
    throw Error(ErrorCode::kUnterminatedLiteral, "string literal", begin);
  }

  // 'a' or '\n'. Anything else starting with a quote is a plain symbol.
  bool lex_char_literal(std::size_t begin) {
    std::size_t at = pos_ + 1;
    if (at >= src_.size()) return false;
    if (src_[at] == '\\') {
      const std::size_t close = src_.find('\'', at + 2);
      if (close == std::string_view::npos || close > at + 10) {
        throw Error(ErrorCode::kUnterminatedLiteral, "char literal", begin);
      }
      emit(TokenKind::kLiteral, begin, close + 1);
      return true;
    }
    std::size_t n = 0;
    peek(at, &n);
    if (at + n < src_.size() && src_[at + n] == '\'') {
      emit(TokenKind::kLiteral, begin, at + n + 1);
      return true;
    }
    return false;
  }

  void lex_number(std::size_t begin) {
    std::size_t at = pos_;
    if (starts_with("0x") || starts_with("0b") || starts_with("0o")) at += 2;
    while (at < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[at])) || src_[at] == '_'))
      ++at;
    // Decimal fraction, but not a range `..` or a projection like `h.1.2`.
    if (at + 1 < src_.size() && src_[at] == '.' &&
        std::isdigit(static_cast<unsigned char>(src_[at + 1])) &&
        (begin == 0 || src_[begin - 1] != '.')) {
      at += 1;
      while (at < src_.size() && std::isdigit(static_cast<unsigned char>(src_[at])))
        ++at;
    }
    emit(TokenKind::kLiteral, begin, at);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::vector<Token> tokens_;
};

}  // namespace

std::string_view token_kind_name(TokenKind kind) {
  switch (kind) {
    case TokenKind::kKeyword: return "keyword";
    case TokenKind::kIdentifier: return "identifier";
    case TokenKind::kSymbol: return "symbol";
    case TokenKind::kLiteral: return "literal";
    case TokenKind::kComment: return "comment";
    case TokenKind::kWhitespace: return "whitespace";
  }
  return "unknown";
}

const std::vector<std::string>& lean_keywords() {
  static const std::vector<std::string> kWords = {
      "abbrev", "attribute", "axiom", "by", "calc", "class", "def",
      "deriving", "do", "else", "end", "example", "export", "extends",
      "for", "from", "fun", "have", "if", "import", "in", "inductive",
      "infix", "infixl", "infixr", "instance", "lemma", "let", "local",
      "macro", "macro_rules", "match", "mutual", "namespace", "noncomputable",
      "nomatch", "nofun", "notation", "opaque", "open", "partial", "postfix",
      "prefix", "private", "protected", "prelude", "return", "scoped",
      "section", "set_option", "show", "structure", "suffices", "syntax",
      "termination_by", "decreasing_by", "then", "theorem", "universe",
      "unsafe", "variable", "where", "with", "at", "Type", "Prop", "Sort",
      "mut", "unless", "try", "catch", "finally", "break", "continue",
      "elab", "elab_rules", "initialize", "builtin_initialize", "omit",
      "include", "using", "forall",
  };
  return kWords;
}

bool is_keyword(std::string_view word) {
  static const std::unordered_set<std::string_view> kSet = [] {
    std::unordered_set<std::string_view> s;
    for (const auto& w : lean_keywords()) s.insert(w);
    return s;
  }();
  return kSet.count(word) > 0;
}

std::vector<Token> tokenize(std::string_view source) {
  for (std::size_t at = 0; at < source.size();) {
    char32_t cp = 0;
    const std::size_t n = decode_utf8(source, at, &cp);
    if (n == 0) throw Error(ErrorCode::kInvalidUtf8, "malformed sequence", at);
    at += n;
  }
  return Lexer(source).run();
}

std::string render(std::span<const Token> tokens) {
  std::string out;
  for (const Token& t : tokens) out += t.text;
  return out;
}

}  // namespace onng
