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

#include "onng/promptgen.h"

#include <cstdio>
#include <map>

#include <json.hpp>

#include "onng/error.h"

namespace onng {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

// Substitutes placeholders in one pass; inserted text is never rescanned.
std::string substitute(std::string_view text,
                       const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t at = 0;
  while (at < text.size()) {
    const auto open = text.find("{{", at);
    if (open == std::string_view::npos) break;
    const auto close = text.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    const std::string key(text.substr(open + 2, close - open - 2));
    auto it = values.find(key);
    if (it == values.end()) {
      throw Error(ErrorCode::kConfigError,
                  "unknown template placeholder {{" + key + "}}");
    }
    out.append(text.substr(at, open - at));
    out += it->second;
    at = close + 2;
  }
  out.append(text.substr(at));
  return out;
}

std::string strip_fence(std::string code) {
  code = trim(code);
  if (code.rfind("```", 0) != 0) return code;
  const auto first_nl = code.find('\n');
  if (first_nl == std::string::npos) return trim(code.substr(3));
  std::string inner = code.substr(first_nl + 1);
  const auto end = inner.rfind("```");
  if (end != std::string::npos) inner.erase(end);
  return trim(inner);
}

// Index one past the `}` matching the `{` at `open`, honouring strings.
std::size_t match_brace(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}' && --depth == 0) {
      return i + 1;
    }
  }
  return std::string_view::npos;
}

const nlohmann::json* field(const nlohmann::json& obj, const char* name,
                            const char* lower) {
  if (auto it = obj.find(name); it != obj.end()) return &*it;
  if (auto it = obj.find(lower); it != obj.end()) return &*it;
  return nullptr;
}

}  // namespace

const std::string& schema_instruction() {
  static const std::string kText =
      "Reply with a single JSON object with exactly two string fields: "
      "\"Draft\", a natural-language plan of the proof, and \"Code\", the Lean "
      "4 proof that follows `:=` in the theorem above (for example "
      "\"by\\n  rw [h]\").";
  return kText;
}

std::string theorem_id_for(std::size_t theorem_ordinal) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "thm-%03zu", theorem_ordinal + 1);
  return buf;
}

Query build_query(const Corpus& corpus, std::size_t theorem_ordinal,
                  std::string_view template_text) {
  const auto theorems = corpus.theorem_positions();
  if (theorem_ordinal >= theorems.size()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "theorem " + std::to_string(theorem_ordinal) + " of " +
                    std::to_string(theorems.size()));
  }
  Query q;
  q.theorem_id = theorem_id_for(theorem_ordinal);
  q.declaration_index = theorems[theorem_ordinal];

  std::string defs, prior;
  for (std::size_t i = 0; i < q.declaration_index; ++i) {
    const Declaration& d = corpus.declarations[i];
    if (d.kind == DeclKind::kTheorem) {
      prior += (prior.empty() ? "" : "\n\n") + trim(render(d.statement()));
    } else {
      std::vector<Token> body(d.tokens.begin() + d.keyword_index,
                              d.tokens.end());
      defs += (defs.empty() ? "" : "\n\n") + trim(render(strip_comments(body)));
    }
  }
  q.definitions_block = defs;
  q.prior_theorems_block = prior.empty() ? "(none)" : prior;
  q.target_statement =
      trim(render(corpus.declarations[q.declaration_index].statement()));
  q.allowed_tactics.assign(corpus.tactic_whitelist.begin(),
                           corpus.tactic_whitelist.end());
  q.schema_instruction = schema_instruction();

  std::string tactics;
  for (const auto& t : q.allowed_tactics) {
    tactics += (tactics.empty() ? "" : ", ") + t;
  }

  std::string_view user = template_text;
  if (const auto marker = template_text.find(kTemplateUserMarker);
      marker != std::string_view::npos) {
    q.system_preamble = trim(template_text.substr(0, marker));
    user = template_text.substr(marker + kTemplateUserMarker.size());
  }
  q.rendered = trim(substitute(user, {{"definitions", q.definitions_block},
                                      {"prior_theorems", q.prior_theorems_block},
                                      {"target", q.target_statement},
                                      {"tactics", tactics},
                                      {"schema", q.schema_instruction}}));
  if (q.rendered.find(q.schema_instruction) == std::string::npos) {
    q.rendered += "\n\n" + q.schema_instruction;
  }
  q.rendered += "\n";
  return q;
}

ModelResponse parse_response(std::string_view raw) {
  constexpr int kMaxCandidates = 256;
  int tried = 0;
  for (std::size_t open = raw.find('{');
       open != std::string_view::npos && tried < kMaxCandidates;
       open = raw.find('{', open + 1), ++tried) {
    const std::size_t end = match_brace(raw, open);
    if (end == std::string_view::npos) continue;
    nlohmann::json obj = nlohmann::json::parse(
        raw.substr(open, end - open), nullptr, /*allow_exceptions=*/false);
    if (!obj.is_object()) continue;

    ModelResponse r;
    r.raw = std::string(raw);
    const nlohmann::json* code = field(obj, "Code", "code");
    if (code == nullptr || !code->is_string() ||
        trim(code->get<std::string>()).empty()) {
      throw Error(ErrorCode::kMissingField, "Code");
    }
    r.code = strip_fence(code->get<std::string>());
    if (r.code.empty()) throw Error(ErrorCode::kMissingField, "Code");
    const nlohmann::json* draft = field(obj, "Draft", "draft");
    if (draft != nullptr && draft->is_string()) {
      r.draft = draft->get<std::string>();
    } else {
      r.draft_missing = true;
    }
    return r;
  }
  throw Error(ErrorCode::kMalformedResponse, "no JSON object in reply");
}

}  // namespace onng
