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

#include "onng/corpus.h"

#include <algorithm>
#include <functional>
#include <map>
#include <queue>
#include <unordered_map>

#include "onng/error.h"
#include "onng/tactics.h"

namespace onng {

namespace {

const std::set<std::string>& command_keywords() {
  static const std::set<std::string> kWords = {
      "def", "abbrev", "theorem", "lemma", "axiom", "inductive",
      "notation", "infix", "infixl", "infixr", "prefix", "postfix"};
  return kWords;
}

DeclKind kind_for(const std::string& keyword) {
  if (keyword == "def" || keyword == "abbrev") return DeclKind::kDefinition;
  if (keyword == "theorem" || keyword == "lemma") return DeclKind::kTheorem;
  if (keyword == "axiom") return DeclKind::kAxiom;
  if (keyword == "inductive") return DeclKind::kInductive;
  return DeclKind::kNotation;
}

bool opens(const Token& t) {
  return t.kind == TokenKind::kSymbol &&
         (t.text == "(" || t.text == "[" || t.text == "{" || t.text == "⟨" ||
          t.text == "⦃");
}

bool closes(const Token& t) {
  return t.kind == TokenKind::kSymbol &&
         (t.text == ")" || t.text == "]" || t.text == "}" || t.text == "⟩" ||
          t.text == "⦄");
}

bool at_column_zero(std::span<const Token> tokens, std::size_t i) {
  if (i == 0) return true;
  const Token& prev = tokens[i - 1];
  return prev.kind == TokenKind::kWhitespace && !prev.text.empty() &&
         prev.text.back() == '\n';
}

std::string unquote_atom(const std::string& literal) {
  std::string inner = literal.substr(1, literal.size() - 2);
  const auto first = inner.find_first_not_of(' ');
  if (first == std::string::npos) return "";
  const auto last = inner.find_last_not_of(' ');
  return inner.substr(first, last - first + 1);
}

// Reference analysis over one declaration's tokens.
class ReferenceScanner {
 public:
  explicit ReferenceScanner(Declaration& decl) : decl_(decl) {
    for (std::size_t i = 0; i < decl.tokens.size(); ++i) {
      if (!decl.tokens[i].is_trivia()) sig_.push_back(i);
    }
    for (std::size_t h : tactic_head_indices(decl.tokens)) heads_.insert(h);
  }

  void run() {
    collect_bound();
    collect_references();
  }

 private:
  const Token& tok(std::size_t s) const { return decl_.tokens[sig_[s]]; }
  bool is_ident(std::size_t s) const {
    return s < sig_.size() && tok(s).kind == TokenKind::kIdentifier;
  }
  bool is_sym(std::size_t s, std::string_view text) const {
    return s < sig_.size() && tok(s).is(TokenKind::kSymbol, text);
  }
  // `.` immediately attached on both sides, as in `MyNat.zero`.
  bool dotted_after(std::size_t s) const {
    return s > 0 && is_sym(s - 1, ".") && sig_[s - 1] + 1 == sig_[s];
  }
  bool dotted_before(std::size_t s) const {
    return is_sym(s + 1, ".") && sig_[s] + 1 == sig_[s + 1];
  }
  bool is_head(std::size_t s) const { return heads_.count(sig_[s]) > 0; }

  void bind(std::size_t s) {
    if (is_ident(s) && !dotted_before(s) && !dotted_after(s)) {
      bound_.insert(tok(s).text);
    }
  }

  void collect_bound() {
    const bool notation = decl_.kind == DeclKind::kNotation;
    const bool inductive = decl_.kind == DeclKind::kInductive;
    std::size_t separator_sig = sig_.size();
    for (std::size_t s = 0; s < sig_.size(); ++s) {
      if (sig_[s] == decl_.body_separator) separator_sig = s;
    }

    for (std::size_t s = 0; s < sig_.size(); ++s) {
      const Token& t = tok(s);
      if (notation && s < separator_sig && t.kind == TokenKind::kIdentifier) {
        bind(s);
        continue;
      }
      if (opens(t) && t.text != "⟨") bind_group(s);
      if (t.is(TokenKind::kKeyword, "fun") || t.is(TokenKind::kSymbol, "λ") ||
          t.is(TokenKind::kSymbol, "∀") || t.is(TokenKind::kSymbol, "∃") ||
          t.is(TokenKind::kSymbol, "∃!") ||
          t.is(TokenKind::kKeyword, "forall")) {
        bind_binder_list(s + 1);
      }
      if ((t.is(TokenKind::kKeyword, "have") ||
           t.is(TokenKind::kKeyword, "let") ||
           t.is(TokenKind::kKeyword, "suffices")) &&
          is_ident(s + 1)) {
        bind(s + 1);
      }
      if (t.kind == TokenKind::kIdentifier && is_head(s) &&
          (t.text == "intro" || t.text == "intros" || t.text == "rintro" ||
           t.text == "obtain" || t.text == "rcases" || t.text == "cases'" ||
           t.text == "induction'" || t.text == "rename_i")) {
        for (std::size_t k = s + 1; k < sig_.size() && !is_head(k); ++k) {
          if (is_sym(k, ":=") || is_sym(k, ";")) break;
          if (t.text == "rcases" && !is_sym(k, "⟨") && k == s + 1) continue;
          bind(k);
        }
      }
      if (!inductive && is_sym(s, "|")) bind_pattern(s + 1);
    }
  }

  // `(x y : T)` style group: identifiers before the group's own `:`.
  void bind_group(std::size_t open) {
    int depth = 0;
    std::vector<std::size_t> names;
    for (std::size_t k = open + 1; k < sig_.size(); ++k) {
      const Token& t = tok(k);
      if (opens(t)) ++depth;
      if (closes(t)) {
        if (depth == 0) return;
        --depth;
      }
      if (depth != 0) continue;
      if (t.is(TokenKind::kSymbol, ":")) {
        for (std::size_t n : names) bind(n);
        return;
      }
      if (t.kind != TokenKind::kIdentifier) return;
      names.push_back(k);
    }
  }

  void bind_binder_list(std::size_t s) {
    for (std::size_t k = s; k < sig_.size(); ++k) {
      const Token& t = tok(k);
      if (t.kind == TokenKind::kIdentifier) {
        bind(k);
      } else if (t.is(TokenKind::kSymbol, "⟨") || opens(t)) {
        // Groups bind through bind_group; anonymous-constructor patterns
        // bind every identifier up to the matching bracket.
        int depth = 0;
        for (; k < sig_.size(); ++k) {
          if (opens(tok(k))) ++depth;
          if (closes(tok(k)) && --depth == 0) break;
          if (t.text == "⟨") bind(k);
        }
      } else if (t.is(TokenKind::kSymbol, ",") && k > s &&
                 tok(k - 1).is(TokenKind::kSymbol, "⟩")) {
        continue;
      } else {
        return;
      }
    }
  }

  void bind_pattern(std::size_t s) {
    int depth = 0;
    bool first = true;
    for (std::size_t k = s; k < sig_.size(); ++k) {
      const Token& t = tok(k);
      if (opens(t)) ++depth;
      if (closes(t)) {
        if (depth == 0) return;
        --depth;
      }
      if (depth == 0 && (t.is(TokenKind::kSymbol, "=>") ||
                         t.is(TokenKind::kSymbol, "|"))) {
        return;
      }
      if (depth == 0 && t.is(TokenKind::kSymbol, ":=")) return;
      if (t.kind == TokenKind::kKeyword) return;
      if (t.kind != TokenKind::kIdentifier) continue;
      if (first || dotted_after(k)) {
        first = false;
        if (!dotted_before(k)) {
          soft_.insert(tok(k).text);
          pattern_heads_.insert(k);
        }
        continue;
      }
      bind(k);
    }
  }

  void collect_references() {
    const auto& tactics = known_tactic_names();
    const auto& prelude = prelude_names();
    const auto introduced = decl_.introduced_names();
    const std::set<std::string> own(introduced.begin(), introduced.end());

    for (std::size_t s = 0; s < sig_.size(); ++s) {
      const Token& t = tok(s);
      if (t.kind == TokenKind::kSymbol) {
        decl_.symbol_texts.insert(t.text);
        continue;
      }
      if (t.kind != TokenKind::kIdentifier || t.text == "_") continue;
      if (is_head(s) || tactics.count(t.text) || own.count(t.text) ||
          pattern_heads_.count(s)) {
        continue;
      }
      if (dotted_after(s)) {
        // Component after a dot: a constructor or field of whatever precedes.
        std::size_t root = s - 2;
        while (root >= 2 && dotted_after(root)) root -= 2;
        const std::string& base = tok(root).text;
        if (!bound_.count(base) && !prelude.count(base)) {
          decl_.soft_references.insert(t.text);
        }
        continue;
      }
      if (bound_.count(t.text) || prelude.count(t.text)) continue;
      decl_.referenced_names.insert(t.text);
    }
    for (const std::string& name : soft_) {
      if (!own.count(name) && !prelude.count(name) && !tactics.count(name)) {
        decl_.soft_references.insert(name);
      }
    }
  }

  Declaration& decl_;
  std::vector<std::size_t> sig_;
  std::set<std::size_t> heads_;
  std::set<std::string> bound_;
  std::set<std::string> soft_;
  std::set<std::size_t> pattern_heads_;
};

Declaration parse_one(std::span<const Token> tokens, std::size_t keyword_at,
                      std::string_view label) {
  Declaration decl;
  decl.tokens.assign(tokens.begin(), tokens.end());
  decl.keyword_index = keyword_at;
  decl.module_label = std::string(label);
  const std::string& keyword = tokens[keyword_at].text;
  decl.kind = kind_for(keyword);

  std::vector<std::size_t> sig;
  for (std::size_t i = keyword_at + 1; i < tokens.size(); ++i) {
    if (!tokens[i].is_trivia()) sig.push_back(i);
  }
  const auto malformed = [&](std::size_t at, const std::string& what) {
    throw Error(ErrorCode::kMalformedDeclaration,
                "expected " + what + " in `" + keyword + "` declaration",
                tokens[std::min(at, tokens.size() - 1)].span.begin);
  };

  std::size_t name_sig = 0;
  if (decl.kind == DeclKind::kNotation) {
    for (std::size_t s = 0; s < sig.size(); ++s) {
      const Token& t = tokens[sig[s]];
      if (t.is(TokenKind::kSymbol, "=>")) break;
      if (t.is_string_literal()) {
        decl.name = unquote_atom(t.text);
        break;
      }
    }
    if (decl.name.empty()) malformed(keyword_at, "a quoted operator atom");
  } else {
    if (sig.empty() || tokens[sig[0]].kind != TokenKind::kIdentifier) {
      malformed(sig.empty() ? keyword_at : sig[0], "an identifier");
    }
    decl.name = tokens[sig[0]].text;
    if (sig.size() > 1 && tokens[sig[1]].is(TokenKind::kSymbol, ".") &&
        tokens[sig[0]].span.end == tokens[sig[1]].span.begin) {
      malformed(sig[1], "an undotted name");
    }
    name_sig = 1;
  }

  // Locate the statement/body separator at bracket depth zero.
  decl.body_separator = tokens.size();
  int depth = 0;
  for (std::size_t s = name_sig; s < sig.size(); ++s) {
    const Token& t = tokens[sig[s]];
    if (opens(t)) ++depth;
    if (closes(t)) --depth;
    if (depth != 0) continue;
    const bool assign = t.is(TokenKind::kSymbol, ":=");
    if (decl.kind == DeclKind::kNotation && t.is(TokenKind::kSymbol, "=>")) {
      decl.body_separator = sig[s];
      break;
    }
    if (decl.kind == DeclKind::kInductive &&
        (t.is(TokenKind::kKeyword, "where") || t.is(TokenKind::kSymbol, "|"))) {
      decl.body_separator = sig[s];
      break;
    }
    if ((decl.kind == DeclKind::kTheorem || decl.kind == DeclKind::kDefinition ||
         decl.kind == DeclKind::kAxiom) &&
        (assign || (decl.kind == DeclKind::kDefinition &&
                    t.is(TokenKind::kSymbol, "|")))) {
      decl.body_separator = sig[s];
      break;
    }
  }
  const bool has_body = decl.body_separator < tokens.size();
  if (decl.kind == DeclKind::kAxiom && has_body) {
    malformed(decl.body_separator, "no body (axioms are stated, not proven)");
  }
  if (decl.kind != DeclKind::kAxiom && !has_body) {
    malformed(tokens.size() - 1, decl.kind == DeclKind::kNotation ? "`=>`"
                                 : decl.kind == DeclKind::kInductive
                                     ? "`where` or constructors"
                                     : "`:=`");
  }
  if (has_body && decl.proof_body().empty()) {
    malformed(decl.body_separator, "a non-empty body");
  }
  if (decl.kind != DeclKind::kAxiom) {
    bool any = false;
    for (const Token& t : decl.proof_body()) any = any || !t.is_trivia();
    if (!any) malformed(decl.body_separator, "a non-empty body");
  }

  if (decl.kind == DeclKind::kInductive) {
    int d = 0;
    for (std::size_t s = 0; s < sig.size(); ++s) {
      const Token& t = tokens[sig[s]];
      if (sig[s] < decl.body_separator) continue;
      if (opens(t)) ++d;
      if (closes(t)) --d;
      if (d == 0 && t.is(TokenKind::kSymbol, "|") && s + 1 < sig.size() &&
          tokens[sig[s + 1]].kind == TokenKind::kIdentifier) {
        decl.constructors.push_back(tokens[sig[s + 1]].text);
      }
    }
  }

  ReferenceScanner(decl).run();
  return decl;
}

}  // namespace

std::string_view decl_kind_name(DeclKind kind) {
  switch (kind) {
    case DeclKind::kDefinition: return "definition";
    case DeclKind::kAxiom: return "axiom";
    case DeclKind::kTheorem: return "theorem";
    case DeclKind::kNotation: return "notation";
    case DeclKind::kInductive: return "inductive";
  }
  return "unknown";
}

std::span<const Token> Declaration::statement() const {
  const std::size_t end = std::min(body_separator, tokens.size());
  return std::span<const Token>(tokens).subspan(keyword_index,
                                                end - keyword_index);
}

std::span<const Token> Declaration::proof_body() const {
  if (body_separator >= tokens.size()) return {};
  return std::span<const Token>(tokens).subspan(body_separator + 1);
}

std::vector<std::string> Declaration::introduced_names() const {
  std::vector<std::string> names{name};
  names.insert(names.end(), constructors.begin(), constructors.end());
  return names;
}

std::size_t Corpus::theorem_count() const {
  return theorem_positions().size();
}

std::vector<std::size_t> Corpus::theorem_positions() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < declarations.size(); ++i) {
    if (declarations[i].kind == DeclKind::kTheorem) out.push_back(i);
  }
  return out;
}

std::string Corpus::module_source(std::string_view label) const {
  std::string out;
  for (const Declaration& d : declarations) {
    if (d.module_label == label) out += d.source();
  }
  return out;
}

const std::set<std::string>& prelude_names() {
  static const std::set<std::string> kNames = {
      "Type", "Prop", "Sort", "Eq", "Ne", "Iff", "And", "Or", "Not", "True",
      "False", "Exists", "rfl", "trivial", "absurd", "congrArg", "congrFun",
      "id", "propext", "funext"};
  return kNames;
}

std::vector<Declaration> parse_declarations(std::span<const Token> tokens,
                                            std::string_view module_label) {
  // Column-zero command keywords start declarations; anything else at
  // column zero is an unsupported command.
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (t.is_trivia() || !at_column_zero(tokens, i)) continue;
    if (t.kind == TokenKind::kKeyword && command_keywords().count(t.text)) {
      starts.push_back(i);
    } else {
      throw Error(ErrorCode::kMalformedDeclaration,
                  "expected a declaration keyword, found `" + t.text + "`",
                  t.span.begin);
    }
  }
  if (starts.empty()) {
    for (const Token& t : tokens) {
      if (!t.is_trivia()) {
        throw Error(ErrorCode::kMalformedDeclaration,
                    "expected a declaration keyword at column zero",
                    t.span.begin);
      }
    }
    return {};
  }

  std::vector<Declaration> decls;
  std::size_t begin = 0;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    std::size_t end = tokens.size();
    if (k + 1 < starts.size()) {
      // Trailing trivia belongs to the next declaration.
      end = starts[k + 1];
      while (end > starts[k] && tokens[end - 1].is_trivia()) --end;
    }
    decls.push_back(parse_one(tokens.subspan(begin, end - begin),
                              starts[k] - begin, module_label));
    begin = end;
  }
  return decls;
}

Corpus order_by_dependency(std::vector<Declaration> decls) {
  std::unordered_map<std::string, std::size_t> owner;
  std::set<std::string> atoms;
  for (std::size_t i = 0; i < decls.size(); ++i) {
    for (const std::string& n : decls[i].introduced_names()) {
      if (!owner.emplace(n, i).second) {
        throw Error(ErrorCode::kMalformedDeclaration,
                    "duplicate declaration of `" + n + "`");
      }
    }
    if (decls[i].kind == DeclKind::kNotation) atoms.insert(decls[i].name);
  }

  std::vector<std::set<std::size_t>> deps(decls.size());
  for (std::size_t i = 0; i < decls.size(); ++i) {
    Declaration& d = decls[i];
    std::set<std::string> refs;
    for (const std::string& r : d.referenced_names) {
      if (prelude_names().count(r)) continue;
      if (!owner.count(r)) {
        throw Error(ErrorCode::kUnresolvedReference,
                    "`" + r + "` in declaration `" + d.name + "`");
      }
      refs.insert(r);
    }
    for (const std::string& r : d.soft_references) {
      if (owner.count(r)) refs.insert(r);
    }
    for (const std::string& s : d.symbol_texts) {
      if (atoms.count(s)) refs.insert(s);
    }
    std::set<std::string> final_refs;
    for (const std::string& r : refs) {
      if (owner.at(r) == i) continue;
      final_refs.insert(r);
      deps[i].insert(owner.at(r));
    }
    d.referenced_names = std::move(final_refs);
    d.soft_references.clear();
  }

  // Kahn's algorithm, always releasing the earliest ready input position.
  std::vector<std::size_t> indegree(decls.size(), 0);
  std::vector<std::vector<std::size_t>> users(decls.size());
  for (std::size_t i = 0; i < decls.size(); ++i) {
    indegree[i] = deps[i].size();
    for (std::size_t j : deps[i]) users[j].push_back(i);
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>,
                      std::greater<std::size_t>>
      ready;
  for (std::size_t i = 0; i < decls.size(); ++i) {
    if (indegree[i] == 0) ready.push(i);
  }
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    const std::size_t i = ready.top();
    ready.pop();
    order.push_back(i);
    for (std::size_t u : users[i]) {
      if (--indegree[u] == 0) ready.push(u);
    }
  }

  if (order.size() != decls.size()) {
    // Walk dependencies from any unplaced node until one repeats.
    std::size_t start = 0;
    while (indegree[start] == 0) ++start;
    std::vector<std::size_t> path;
    std::map<std::size_t, std::size_t> seen;
    std::size_t cur = start;
    while (!seen.count(cur)) {
      seen[cur] = path.size();
      path.push_back(cur);
      for (std::size_t j : deps[cur]) {
        if (indegree[j] != 0) {
          cur = j;
          break;
        }
      }
    }
    std::string cycle;
    for (std::size_t k = seen[cur]; k < path.size(); ++k) {
      cycle += decls[path[k]].name + " -> ";
    }
    cycle += decls[cur].name;
    throw Error(ErrorCode::kCyclicDependency, cycle);
  }

  Corpus corpus;
  corpus.tactic_whitelist = default_tactic_whitelist();
  for (std::size_t i : order) {
    Declaration& d = decls[i];
    d.index = corpus.declarations.size();
    if (std::find(corpus.module_labels.begin(), corpus.module_labels.end(),
                  d.module_label) == corpus.module_labels.end()) {
      corpus.module_labels.push_back(d.module_label);
    }
    corpus.declarations.push_back(std::move(d));
  }
  return corpus;
}

std::set<std::string> renameable_identifiers(const Corpus& corpus) {
  std::set<std::string> out;
  for (const Declaration& d : corpus.declarations) {
    for (const std::string& n : d.introduced_names()) {
      if (is_keyword(n) || known_tactic_names().count(n) ||
          prelude_names().count(n)) {
        continue;
      }
      out.insert(n);
    }
  }
  return out;
}

std::vector<Token> strip_comments(std::span<const Token> tokens) {
  std::vector<Token> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (t.kind != TokenKind::kComment) {
      out.push_back(t);
      continue;
    }
    // Whole-line comment: drop its indentation and the newline that ends it.
    const bool line_start =
        out.empty() ||
        (out.back().kind == TokenKind::kWhitespace &&
         out.back().text.find('\n') != std::string::npos) ||
        (out.size() == 1 && out.back().kind == TokenKind::kWhitespace);
    if (!line_start) continue;
    if (!out.empty() && out.back().kind == TokenKind::kWhitespace) {
      std::string& ws = out.back().text;
      const auto nl = ws.rfind('\n');
      ws.erase(nl == std::string::npos ? 0 : nl + 1);
      if (ws.empty()) out.pop_back();
    }
    if (i + 1 < tokens.size() && tokens[i + 1].kind == TokenKind::kWhitespace) {
      Token next = tokens[i + 1];
      const auto nl = next.text.find('\n');
      if (nl != std::string::npos) {
        next.text.erase(0, nl + 1);
        ++i;
        if (!next.text.empty()) out.push_back(next);
      }
    }
  }
  // Merge whitespace runs so the stream matches a fresh tokenization.
  std::vector<Token> merged;
  for (Token& t : out) {
    if (!merged.empty() && t.kind == TokenKind::kWhitespace &&
        merged.back().kind == TokenKind::kWhitespace) {
      merged.back().text += t.text;
    } else {
      merged.push_back(std::move(t));
    }
  }
  std::size_t offset = 0;
  for (Token& t : merged) {
    t.span = {offset, offset + t.text.size()};
    offset += t.text.size();
  }
  return merged;
}

}  // namespace onng
