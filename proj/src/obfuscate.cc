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

#include "onng/obfuscate.h"

#include <cmath>
#include <sstream>

#include "onng/corpus_io.h"
#include "onng/error.h"
#include "onng/tactics.h"
#include "onng/unicode.h"

namespace onng {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<char32_t> letters_of(const std::vector<char32_t>& pool) {
  std::vector<char32_t> out;
  for (char32_t c : pool) {
    if (is_ident_start(c)) out.push_back(c);
  }
  return out;
}

// The three passes without any validity repair. Returns code points.
std::vector<char32_t> perturb_raw(const std::vector<char32_t>& in,
                                  const ObfuscationParams& params,
                                  SplitMix64& rng, PerturbStats* stats) {
  const double p = noise_to_prob(params.lambda, params.exponent);
  const double p_del = params.deletion_ratio * p;
  const double p_ins = params.insertion_ratio * p;
  const auto& pool = params.char_pool;
  const std::size_t n = in.size();

  std::vector<char32_t> chars = in;
  for (char32_t& c : chars) {
    if (rng.uniform() < p) {
      c = pool[rng.below(pool.size())];
      if (stats) ++stats->substitutions;
    }
  }

  std::vector<bool> keep(n, true);
  std::size_t remaining = n;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    if (remaining <= 1) continue;  // would empty the identifier
    if (stats) ++stats->deletion_trials;
    if (u < p_del) {
      keep[i] = false;
      --remaining;
      if (stats) ++stats->deletions;
    }
  }

  // One insertion opportunity after every original position.
  std::vector<char32_t> out;
  out.reserve(n + 4);
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(chars[i]);
    if (rng.uniform() < p_ins) {
      out.push_back(pool[rng.below(pool.size())]);
      if (stats) ++stats->insertions;
    }
  }
  if (stats) {
    stats->characters += n;
    stats->length_delta += static_cast<std::int64_t>(out.size()) -
                           static_cast<std::int64_t>(n);
  }
  return out;
}

// Forces every position to be identifier-valid, the head to a letter.
void repair(std::vector<char32_t>& cps, const ObfuscationParams& params,
            SplitMix64& rng) {
  const auto letters = letters_of(params.char_pool);
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (i == 0 && !is_ident_start(cps[0])) {
      cps[0] = letters[rng.below(letters.size())];
    } else if (i > 0 && !is_ident_rest(cps[i])) {
      cps[i] = params.char_pool[rng.below(params.char_pool.size())];
    }
  }
}

bool ident_char_at_edge(const std::string& text, bool back) {
  if (text.empty()) return false;
  const auto cps = to_code_points(text);
  return is_ident_rest(back ? cps.back() : cps.front());
}

std::string trim_spaces(std::string_view s, std::size_t* lead,
                        std::size_t* trail) {
  const auto first = s.find_first_not_of(' ');
  if (first == std::string_view::npos) {
    *lead = s.size();
    *trail = 0;
    return "";
  }
  const auto last = s.find_last_not_of(' ');
  *lead = first;
  *trail = s.size() - last - 1;
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

std::uint64_t SplitMix64::next() {
  state_ += 0x9E3779B97F4A7C15ULL;
  return mix64(state_);
}

double SplitMix64::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t SplitMix64::below(std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return x % n;
}

std::uint64_t substream_seed(std::uint64_t seed, std::string_view name,
                             std::uint32_t attempt) {
  std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return mix64(mix64(seed ^ mix64(h)) +
               0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(attempt) + 1));
}

const std::vector<char32_t>& default_char_pool() {
  static const std::vector<char32_t> kPool = [] {
    std::vector<char32_t> pool;
    for (char32_t c = 'a'; c <= 'z'; ++c) pool.push_back(c);
    for (char32_t c = 'A'; c <= 'Z'; ++c) pool.push_back(c);
    for (char32_t c = '0'; c <= '9'; ++c) pool.push_back(c);
    for (char32_t c = 0x3B1; c <= 0x3C9; ++c) {
      if (c != 0x3BB) pool.push_back(c);  // λ is reserved
    }
    for (char32_t c = 0x391; c <= 0x3A9; ++c) {
      if (c != 0x3A2 && c != 0x3A0 && c != 0x3A3) pool.push_back(c);
    }
    for (char32_t c = 0x2080; c <= 0x2089; ++c) pool.push_back(c);
    return pool;
  }();
  return kPool;
}

std::vector<char32_t> load_char_pool(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<char32_t> pool;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("U+", 0) != 0) {
      throw Error(ErrorCode::kConfigError, "bad pool line: " + line);
    }
    pool.push_back(static_cast<char32_t>(std::stoul(line.substr(2), nullptr, 16)));
  }
  return pool;
}

void ObfuscationParams::validate() const {
  const auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kDomainError, msg);
  };
  if (!(lambda >= 0.0 && lambda <= 1.0)) fail("lambda must lie in [0, 1]");
  if (!(exponent > 0.0)) fail("exponent must be positive");
  if (!(insertion_ratio >= 0.0 && insertion_ratio <= 1.0)) {
    fail("insertion_ratio must lie in [0, 1]");
  }
  if (!(deletion_ratio >= 0.0 && deletion_ratio <= 1.0)) {
    fail("deletion_ratio must lie in [0, 1]");
  }
  if (char_pool.empty()) fail("char_pool is empty");
  for (char32_t c : char_pool) {
    if (!is_ident_rest(c)) {
      fail("char_pool holds U+" + std::to_string(static_cast<unsigned>(c)) +
           ", not valid inside an identifier");
    }
  }
  if (letters_of(char_pool).empty()) fail("char_pool has no letters");
}

double noise_to_prob(double lambda, double exponent) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(ErrorCode::kDomainError,
                "noise level " + std::to_string(lambda) + " outside [0, 1]");
  }
  return std::pow(lambda, exponent);
}

std::string perturb_identifier(std::string_view name,
                               const ObfuscationParams& params,
                               SplitMix64& rng, PerturbStats* stats) {
  auto cps = perturb_raw(to_code_points(name), params, rng, stats);
  repair(cps, params, rng);
  return from_code_points(cps);
}

const std::set<std::string>& reserved_core_names() {
  static const std::set<std::string> kNames = {
      "Nat", "Int", "List", "Array", "Bool", "String", "Char", "Float",
      "Unit", "PUnit", "Option", "Prod", "PProd", "Sum", "Sigma", "Subtype",
      "Fin", "Add", "Mul", "Sub", "Div", "Mod", "Neg", "Pow", "HAdd", "HMul",
      "HPow", "LE", "LT", "Max", "Min", "OfNat", "Decidable", "Inhabited",
      "Nonempty", "Function", "Classical", "Quot", "Quotient", "Setoid",
      "Empty", "PEmpty", "IO", "Id", "Std", "Lean", "Init", "Except",
      "Thunk", "Task", "ite", "dite", "cast", "default", "inferInstance",
      "panic", "sorryAx", "OnngBench"};
  return kNames;
}

RenameMap build_rename_map(const Corpus& corpus,
                           const ObfuscationParams& params) {
  params.validate();
  const std::set<std::string> names = renameable_identifiers(corpus);

  // Every identifier spelled anywhere in the corpus that is not itself
  // renamed (binders, pattern variables) must stay unambiguous.
  std::set<std::string> avoid = reserved_core_names();
  for (const auto& d : corpus.declarations) {
    for (const Token& t : d.tokens) {
      if (t.kind == TokenKind::kIdentifier && !names.count(t.text)) {
        avoid.insert(t.text);
      }
    }
  }
  for (const auto& w : lean_keywords()) avoid.insert(w);
  avoid.insert(known_tactic_names().begin(), known_tactic_names().end());
  avoid.insert(corpus.tactic_whitelist.begin(), corpus.tactic_whitelist.end());
  avoid.insert(prelude_names().begin(), prelude_names().end());

  RenameMap map;
  map.lambda = params.lambda;
  map.seed = params.seed;
  std::set<std::string> used;
  for (const std::string& name : names) {
    const auto original = to_code_points(name);
    bool placed = false;
    for (int attempt = 0; attempt < kRenameRetryBound && !placed; ++attempt) {
      SplitMix64 rng(substream_seed(params.seed, name,
                                    static_cast<std::uint32_t>(attempt)));
      auto cps = perturb_raw(original, params, rng, nullptr);
      if (cps != original) repair(cps, params, rng);
      const std::string candidate = from_code_points(cps);
      if (used.count(candidate)) continue;
      // An untouched name is valid by construction of the source corpus.
      const bool ok = candidate == name ||
                      (is_valid_identifier(candidate) && !is_keyword(candidate) &&
                       !avoid.count(candidate));
      if (!ok) continue;
      map.entries[name] = candidate;
      used.insert(candidate);
      placed = true;
    }
    if (!placed) {
      throw Error(ErrorCode::kCollisionExhaustion,
                  "no free name for `" + name + "` after " +
                      std::to_string(kRenameRetryBound) + " draws");
    }
  }
  return map;
}

Corpus apply_rename(const Corpus& corpus, const RenameMap& map) {
  std::vector<Declaration> renamed;
  for (const std::string& label : corpus.module_labels) {
    std::vector<Token> tokens;
    for (const Declaration& d : corpus.declarations) {
      if (d.module_label != label) continue;
      for (const Token& t : d.tokens) {
        Token out = t;
        if (t.kind == TokenKind::kIdentifier || t.kind == TokenKind::kSymbol) {
          auto it = map.entries.find(t.text);
          if (it != map.entries.end()) out.text = it->second;
        } else if (d.kind == DeclKind::kNotation && t.is_string_literal()) {
          std::size_t lead = 0, trail = 0;
          const std::string inner = trim_spaces(
              std::string_view(t.text).substr(1, t.text.size() - 2), &lead,
              &trail);
          auto it = map.entries.find(inner);
          if (it != map.entries.end()) {
            out.text = "\"" + std::string(lead, ' ') + it->second +
                       std::string(trail, ' ') + "\"";
          }
        }
        tokens.push_back(std::move(out));
      }
    }
    // A symbol that became a word must not fuse with its neighbours.
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i].kind != TokenKind::kSymbol ||
          !ident_char_at_edge(tokens[i].text, false)) {
        continue;
      }
      if (i > 0 && ident_char_at_edge(tokens[i - 1].text, true)) {
        tokens[i].text.insert(0, " ");
      }
      if (i + 1 < tokens.size() && ident_char_at_edge(tokens[i + 1].text, false)) {
        tokens[i].text += " ";
      }
    }
    const std::string source = render(strip_comments(tokens));
    auto decls = parse_declarations(tokenize(source), label);
    for (auto& d : decls) renamed.push_back(std::move(d));
  }
  Corpus out = order_by_dependency(std::move(renamed));
  out.module_labels = corpus.module_labels;
  out.module_files = corpus.module_files;
  out.tactic_whitelist = corpus.tactic_whitelist;
  out.toolchain = corpus.toolchain;
  return out;
}

nlohmann::ordered_json rename_map_to_json(const RenameMap& map) {
  nlohmann::ordered_json doc;
  doc["schema"] = 1;
  doc["lambda"] = map.lambda;
  doc["seed"] = map.seed;
  nlohmann::ordered_json entries = nlohmann::ordered_json::object();
  for (const auto& [k, v] : map.entries) entries[k] = v;
  doc["entries"] = std::move(entries);
  return doc;
}

RenameMap rename_map_from_json(const nlohmann::json& doc) {
  RenameMap map;
  map.lambda = doc.at("lambda").get<double>();
  map.seed = doc.at("seed").get<std::uint64_t>();
  map.entries = doc.at("entries").get<std::map<std::string, std::string>>();
  return map;
}

}  // namespace onng
