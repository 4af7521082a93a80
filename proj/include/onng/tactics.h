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

#ifndef ONNG_TACTICS_H_
#define ONNG_TACTICS_H_

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "onng/lexer.h"

namespace onng {

// Indices (into `tokens`) of tokens that start a tactic: the first token after
// `by`, after `;` or `<;>`, after an alternative's `=>`, after a combinator
// such as `repeat`, and every line-leading token aligned with the enclosing
// tactic block's column. Tokens inside comments and literals never qualify.
std::vector<std::size_t> tactic_head_indices(std::span<const Token> tokens);

// Lean tactic vocabulary, core and common library tactics alike. These names
// are interface vocabulary: they are never declared, referenced or renamed.
const std::set<std::string>& known_tactic_names();

// High-level automation excluded from proofs.
const std::set<std::string>& forbidden_tactic_names();

// Whitelist used when a corpus does not declare its own.
const std::set<std::string>& default_tactic_whitelist();

}  // namespace onng

#endif  // ONNG_TACTICS_H_
