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

#include "onng/tactics.h"

#include <vector>

#include "onng/unicode.h"

namespace onng {

namespace {

bool is_combinator(const Token& t) {
  static const std::set<std::string> kCombinators = {
      "repeat", "try", "first", "all_goals", "any_goals", "focus",
      "iterate", "repeat'", "classical"};
  return (t.kind == TokenKind::kIdentifier || t.kind == TokenKind::kKeyword) &&
         kCombinators.count(t.text) > 0;
}

std::size_t count_code_points(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

}  // namespace

std::vector<std::size_t> tactic_head_indices(std::span<const Token> tokens) {
  std::vector<std::size_t> heads;

  // Column (in code points) and line-leading flag for every token.
  std::vector<std::size_t> column(tokens.size(), 0);
  std::vector<bool> line_leading(tokens.size(), false);
  std::size_t col = 0;
  bool at_line_start = true;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    column[i] = col;
    const Token& t = tokens[i];
    if (!t.is_trivia()) {
      line_leading[i] = at_line_start;
      at_line_start = false;
    }
    const std::size_t nl = t.text.rfind('\n');
    if (nl == std::string::npos) {
      col += count_code_points(t.text);
    } else {
      col = count_code_points(std::string_view(t.text).substr(nl + 1));
      at_line_start = true;
    }
  }

  std::vector<std::size_t> blocks;  // columns of open tactic blocks
  std::vector<int> fun_depths;      // bracket depths of pending `fun` binders
  int depth = 0;
  int first_depth = -1;             // depth of an active `first | ...`
  bool open_block = false;          // next token starts a new block
  bool next_is_head = false;        // next token heads a tactic

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (t.is_trivia()) continue;

    bool head = false;
    if (open_block) {
      blocks.push_back(column[i]);
      head = true;
      open_block = false;
    } else if (line_leading[i]) {
      while (!blocks.empty() && column[i] < blocks.back()) blocks.pop_back();
      head = !blocks.empty() && (column[i] == blocks.back() || next_is_head);
      if (head) first_depth = -1;
    } else if (next_is_head) {
      head = true;
    }
    next_is_head = false;
    if (head) heads.push_back(i);

    if (t.is(TokenKind::kKeyword, "by")) {
      open_block = true;
    } else if (t.is(TokenKind::kKeyword, "fun") ||
               t.is(TokenKind::kSymbol, "λ")) {
      fun_depths.push_back(depth);
    } else if (t.kind == TokenKind::kSymbol) {
      const std::string& s = t.text;
      if (s == "(" || s == "[" || s == "{" || s == "⟨" || s == "⦃") {
        ++depth;
        if (head && s == "(") next_is_head = true;
      } else if (s == ")" || s == "]" || s == "}" || s == "⟩" || s == "⦄") {
        --depth;
        while (!fun_depths.empty() && fun_depths.back() > depth)
          fun_depths.pop_back();
        if (first_depth > depth) first_depth = -1;
      } else if (s == "=>") {
        if (!fun_depths.empty() && fun_depths.back() == depth) {
          fun_depths.pop_back();
        } else if (!blocks.empty()) {
          open_block = true;
        }
      } else if ((s == ";" || s == "<;>") && !blocks.empty()) {
        next_is_head = true;
      } else if ((s == "·" || s == ".") && head) {
        open_block = true;
      } else if (s == "|" && first_depth == depth) {
        next_is_head = true;
      }
    }
    if (head && is_combinator(t)) {
      next_is_head = true;
      if (t.text == "first") {
        first_depth = depth;
        next_is_head = false;
      }
    }
  }
  return heads;
}

const std::set<std::string>& known_tactic_names() {
  static const std::set<std::string> kNames = {
      "abel", "absurd", "ac_rfl", "admit", "aesop", "all_goals", "any_goals",
      "apply", "apply_assumption", "apply_fun", "assumption", "bv_decide",
      "by_cases", "by_contra", "calc", "case", "cases", "change", "classical",
      "clear", "congr", "constructor", "contradiction", "contrapose", "conv",
      "decide", "done", "dsimp", "exact", "exacts", "exfalso", "exists",
      "existsi", "ext", "fail", "field_simp", "first", "focus", "funext",
      "gcongr", "generalize", "grind", "induction", "infer_instance",
      "injection", "intro", "intros", "iterate", "left", "linarith",
      "native_decide", "nlinarith", "norm_cast", "norm_num", "nth_rewrite",
      "nth_rw", "obtain", "omega", "polyrith", "positivity", "push_cast",
      "push_neg", "rcases", "refine", "refine'", "rename_i", "repeat",
      "revert", "rewrite", "rfl", "right", "ring", "ring_nf", "rintro", "rw",
      "rwa", "erw", "simp", "simp_all", "simp_arith", "simp_rw", "simpa",
      "skip", "sorry", "specialize", "split", "subst", "symm", "tauto",
      "trace", "trans", "trivial", "unfold", "use", "exact?", "apply?",
      "rw?", "simp?", "decreasing_tactic", "exact_mod_cast", "induction'",
      "cases'", "set", "show_term", "library_search", "hint", "itauto",
      "finish", "norm_num1", "module", "compute_degree", "interval_cases",
      "fin_cases", "mono", "bound", "zify", "qify", "lift", "choose",
      "peel", "wlog", "nontriviality", "inhabit", "slim_check", "plausible",
      "with_reducible", "and_intros", "subst_vars", "injections", "unhygienic",
  };
  return kNames;
}

const std::set<std::string>& forbidden_tactic_names() {
  static const std::set<std::string> kNames = {
      "simp", "simp_all", "simp_arith", "simpa", "simp_rw", "dsimp",
      "linarith", "nlinarith", "polyrith", "ring", "ring_nf", "omega",
      "decide", "native_decide", "bv_decide", "norm_num", "norm_num1",
      "aesop", "tauto", "itauto", "finish", "field_simp", "positivity",
      "abel", "grind", "exact?", "apply?", "rw?", "simp?", "library_search",
      "hint", "slim_check", "plausible", "gcongr", "bound", "mono",
      "interval_cases", "fin_cases", "sorry", "admit",
  };
  return kNames;
}

const std::set<std::string>& default_tactic_whitelist() {
  static const std::set<std::string> kNames = {
      "rw", "rewrite", "repeat", "induction", "intro", "exact", "apply",
      "rfl", "cases", "symm", "constructor", "have"};
  return kNames;
}

}  // namespace onng
