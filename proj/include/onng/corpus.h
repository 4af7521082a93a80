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

#ifndef ONNG_CORPUS_H_
#define ONNG_CORPUS_H_

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "onng/lexer.h"

namespace onng {

enum class DeclKind { kDefinition, kAxiom, kTheorem, kNotation, kInductive };

std::string_view decl_kind_name(DeclKind kind);

// One top-level command of a theory file. `tokens` holds the declaration and
// the trivia (whitespace and comments) that precedes it, so concatenating
// every declaration of a file reproduces the file exactly.
struct Declaration {
  DeclKind kind = DeclKind::kDefinition;
  // Declared identifier; for notations, the operator atom without padding.
  std::string name;
  // Constructor names introduced by an inductive type.
  std::vector<std::string> constructors;
  std::vector<Token> tokens;
  // Index into `tokens` of the command keyword.
  std::size_t keyword_index = 0;
  // Index of the token that separates statement from body (`:=`, `=>` or
  // `where`); equal to tokens.size() when there is no body.
  std::size_t body_separator = 0;
  std::set<std::string> referenced_names;
  // Candidate references that only count if they name a corpus declaration:
  // constructor positions in patterns and components after a `.`.
  std::set<std::string> soft_references;
  // Distinct symbol texts, resolved against notation atoms when ordering.
  std::set<std::string> symbol_texts;
  std::string module_label;
  std::size_t index = 0;

  std::span<const Token> statement() const;
  std::span<const Token> proof_body() const;
  // All names this declaration introduces.
  std::vector<std::string> introduced_names() const;
  std::string source() const { return render(tokens); }
};

struct Corpus {
  std::vector<Declaration> declarations;
  std::vector<std::string> module_labels;
  // Parallel to module_labels.
  std::vector<std::string> module_files;
  std::set<std::string> tactic_whitelist;
  std::string toolchain = "v4.27.0";

  std::size_t theorem_count() const;
  // Positions (in `declarations`) of theorem-kind declarations, in order.
  std::vector<std::size_t> theorem_positions() const;
  // Concatenated source of the declarations labelled `label`.
  std::string module_source(std::string_view label) const;
};

// Names resolvable without a declaration.
const std::set<std::string>& prelude_names();

std::vector<Declaration> parse_declarations(std::span<const Token> tokens,
                                            std::string_view module_label = "");

// Stable topological sort: among declarations whose dependencies are already
// placed, the one appearing first in the input goes next. Finalizes each
// declaration's referenced_names and index. Throws kCyclicDependency or
// kUnresolvedReference.
Corpus order_by_dependency(std::vector<Declaration> decls);

std::set<std::string> renameable_identifiers(const Corpus& corpus);

// Drops comment tokens. A comment that is alone on its line takes the line
// with it.
std::vector<Token> strip_comments(std::span<const Token> tokens);

}  // namespace onng

#endif  // ONNG_CORPUS_H_
