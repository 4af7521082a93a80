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

#ifndef ONNG_PROMPTGEN_H_
#define ONNG_PROMPTGEN_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "onng/corpus.h"

namespace onng {

// Separates the system preamble from the user message in a template file.
inline constexpr std::string_view kTemplateUserMarker = "=== user ===";

struct Query {
  std::string theorem_id;
  // Position of the target in corpus.declarations.
  std::size_t declaration_index = 0;
  std::string system_preamble;
  std::string definitions_block;
  std::string prior_theorems_block;
  std::string target_statement;
  std::vector<std::string> allowed_tactics;
  std::string schema_instruction;
  // The user message after placeholder substitution.
  std::string rendered;
};

struct ModelResponse {
  std::string draft;
  std::string code;
  std::string raw;
  bool draft_missing = false;
};

const std::string& schema_instruction();

// "thm-001" for the first theorem.
std::string theorem_id_for(std::size_t theorem_ordinal);

// `theorem_ordinal` counts theorems only, from zero. Placeholders are
// {{definitions}}, {{prior_theorems}}, {{target}}, {{tactics}}, {{schema}}.
Query build_query(const Corpus& corpus, std::size_t theorem_ordinal,
                  std::string_view template_text);

ModelResponse parse_response(std::string_view raw);

}  // namespace onng

#endif  // ONNG_PROMPTGEN_H_
