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

#include "onng/unicode.h"

#include "onng/error.h"

namespace onng {

std::size_t decode_utf8(std::string_view text, std::size_t pos,
                        char32_t* out) {
  if (pos >= text.size()) return 0;
  const auto byte = [&](std::size_t i) {
    return static_cast<unsigned char>(text[i]);
  };
  const unsigned char lead = byte(pos);
  std::size_t len;
  char32_t cp;
  if (lead < 0x80) {
    *out = lead;
    return 1;
  } else if ((lead & 0xE0) == 0xC0) {
    len = 2;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4;
    cp = lead & 0x07;
  } else {
    return 0;
  }
  if (pos + len > text.size()) return 0;
  for (std::size_t i = 1; i < len; ++i) {
    const unsigned char c = byte(pos + i);
    if ((c & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (c & 0x3F);
  }
  // Reject overlong forms, surrogates and out-of-range values.
  if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
      (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
      (cp >= 0xD800 && cp <= 0xDFFF)) {
    return 0;
  }
  *out = cp;
  return len;
}

std::string encode_utf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

std::vector<char32_t> to_code_points(std::string_view text) {
  std::vector<char32_t> cps;
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp;
    const std::size_t len = decode_utf8(text, pos, &cp);
    if (len == 0) throw Error(ErrorCode::kInvalidUtf8, "", pos);
    cps.push_back(cp);
    pos += len;
  }
  return cps;
}

std::string from_code_points(const std::vector<char32_t>& cps) {
  std::string out;
  for (char32_t cp : cps) out += encode_utf8(cp);
  return out;
}

bool is_letter_like(char32_t cp) {
  return (cp >= 0x3B1 && cp <= 0x3C9 && cp != 0x3BB) ||  // α-ω except λ
         (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A0 &&
          cp != 0x3A3) ||                 // Α-Ω except Π and Σ
         (cp >= 0x3CA && cp <= 0x3FB) ||  // Coptic
         (cp >= 0x1F00 && cp <= 0x1FFE) ||
         (cp >= 0x2100 && cp <= 0x214F) ||
         (cp >= 0x1D49C && cp <= 0x1D59F);
}

bool is_subscript_alnum(char32_t cp) {
  return (cp >= 0x2080 && cp <= 0x2089) || (cp >= 0x2090 && cp <= 0x209C) ||
         (cp >= 0x1D62 && cp <= 0x1D6A);
}

bool is_ident_start(char32_t cp) {
  return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || cp == '_' ||
         is_letter_like(cp);
}

bool is_ident_rest(char32_t cp) {
  return is_ident_start(cp) || (cp >= '0' && cp <= '9') || cp == '\'' ||
         cp == '!' || cp == '?' || is_subscript_alnum(cp);
}

bool is_valid_identifier(std::string_view text) {
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    char32_t cp;
    const std::size_t len = decode_utf8(text, pos, &cp);
    if (len == 0) return false;
    if (first ? !is_ident_start(cp) : !is_ident_rest(cp)) return false;
    first = false;
    pos += len;
  }
  // A lone underscore is the hole token, not an identifier.
  return !first && text != "_";
}

}  // namespace onng
