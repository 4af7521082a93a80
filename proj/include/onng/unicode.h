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

#ifndef ONNG_UNICODE_H_
#define ONNG_UNICODE_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace onng {

// Decodes one UTF-8 code point starting at `pos`. Returns the number of bytes
// consumed, or 0 if the sequence is invalid or truncated.
std::size_t decode_utf8(std::string_view text, std::size_t pos,
                        char32_t* out);

std::string encode_utf8(char32_t cp);

// Splits a valid UTF-8 string into code points. Throws Error(kInvalidUtf8).
std::vector<char32_t> to_code_points(std::string_view text);
std::string from_code_points(const std::vector<char32_t>& cps);

// Letter-like code points the Lean 4 lexer accepts in identifiers: Greek and
// Coptic (minus the binder/product/sum symbols λ, Π, Σ), extended Greek,
// letterlike symbols and mathematical script letters.
bool is_letter_like(char32_t cp);
// Subscript letters and digits accepted after the first character.
bool is_subscript_alnum(char32_t cp);

bool is_ident_start(char32_t cp);
bool is_ident_rest(char32_t cp);

// True if `text` lexes as exactly one Lean identifier component.
bool is_valid_identifier(std::string_view text);

}  // namespace onng

#endif  // ONNG_UNICODE_H_
