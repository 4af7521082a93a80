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

#include "onng/verify.h"

#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <regex>
#include <sstream>
#include <thread>

#include "onng/corpus_io.h"
#include "onng/error.h"
#include "onng/promptgen.h"
#include "onng/subprocess.h"
#include "onng/tactics.h"

namespace onng {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

bool at_line_start(const std::vector<Token>& tokens, std::size_t i) {
  return i > 0 && tokens[i - 1].kind == TokenKind::kWhitespace &&
         tokens[i - 1].text.back() == '\n';
}

const std::set<std::string>& command_words() {
  static const std::set<std::string> kWords = {
      "def", "abbrev", "theorem", "lemma", "axiom", "inductive", "structure",
      "class", "instance", "notation", "infix", "infixl", "infixr", "prefix",
      "postfix", "macro", "syntax", "namespace", "end", "section", "open",
      "variable", "universe", "example", "set_option", "attribute", "opaque"};
  return kWords;
}

// Proof text that follows `:=` in the assembled theorem.
std::string candidate_body(std::string_view proof_code) {
  std::string code = trim(proof_code);
  if (code.empty()) {
    throw Error(ErrorCode::kMalformedCandidate, "empty candidate");
  }
  std::vector<Token> tokens;
  try {
    tokens = tokenize(code);
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedCandidate,
                std::string("candidate does not lex: ") + e.what());
  }
  std::size_t first = 0;
  while (first < tokens.size() && tokens[first].is_trivia()) ++first;
  if (first < tokens.size() &&
      (tokens[first].is(TokenKind::kKeyword, "theorem") ||
       tokens[first].is(TokenKind::kKeyword, "lemma") ||
       tokens[first].is(TokenKind::kKeyword, "example"))) {
    // A full restatement: keep only its proof, never its statement.
    int depth = 0;
    std::size_t assign = tokens.size();
    for (std::size_t i = first; i < tokens.size(); ++i) {
      const std::string& t = tokens[i].text;
      if (tokens[i].kind != TokenKind::kSymbol) continue;
      if (t == "(" || t == "[" || t == "{" || t == "⟨" || t == "⦃") ++depth;
      if (t == ")" || t == "]" || t == "}" || t == "⟩" || t == "⦄") --depth;
      if (depth == 0 && t == ":=") {
        assign = i;
        break;
      }
    }
    if (assign == tokens.size()) {
      throw Error(ErrorCode::kMalformedCandidate,
                  "restated theorem without `:=`");
    }
    tokens.erase(tokens.begin(), tokens.begin() + assign + 1);
    code = trim(render(tokens));
    tokens = tokenize(code);
  } else if (first < tokens.size() && tokens[first].is(TokenKind::kSymbol, ":=")) {
    tokens.erase(tokens.begin(), tokens.begin() + first + 1);
    code = trim(render(tokens));
    tokens = tokenize(code);
  }
  if (code.empty()) {
    throw Error(ErrorCode::kMalformedCandidate, "empty candidate");
  }
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if ((t.kind == TokenKind::kIdentifier || t.kind == TokenKind::kKeyword) &&
        (t.text == "sorry" || t.text == "admit" || t.text == "sorryAx")) {
      throw Error(ErrorCode::kMalformedCandidate,
                  "candidate uses `" + t.text + "`");
    }
    if (at_line_start(tokens, i) &&
        ((t.kind == TokenKind::kKeyword && command_words().count(t.text)) ||
         (t.kind == TokenKind::kSymbol && t.text == "#"))) {
      throw Error(ErrorCode::kMalformedCandidate,
                  "candidate opens a top-level command `" + t.text + "`");
    }
  }
  return code;
}

struct ResolvedLean {
  std::string path;
  std::string version;
};

std::string find_on_path(const std::string& name) {
  if (name.find('/') != std::string::npos) {
    return ::access(name.c_str(), X_OK) == 0 ? name : "";
  }
  if (const char* path = std::getenv("PATH")) {
    std::stringstream dirs(path);
    std::string dir;
    while (std::getline(dirs, dir, ':')) {
      const fs::path p = fs::path(dir.empty() ? "." : dir) / name;
      if (::access(p.c_str(), X_OK) == 0) return p.string();
    }
  }
  std::vector<fs::path> elan;
  if (const char* home = std::getenv("ELAN_HOME")) elan.emplace_back(home);
  if (const char* home = std::getenv("HOME")) elan.push_back(fs::path(home) / ".elan");
  for (const fs::path& root : elan) {
    const fs::path p = root / "bin" / name;
    if (::access(p.c_str(), X_OK) == 0) return p.string();
  }
  return "";
}

ResolvedLean resolve(const Toolchain& tc) {
  static std::mutex mu;
  static std::map<std::string, ResolvedLean> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(tc.lean);
  if (it == cache.end()) {
    ResolvedLean r;
    r.path = find_on_path(tc.lean);
    if (r.path.empty()) {
      throw Error(ErrorCode::kToolchainMissing,
                  "`" + tc.lean + "` not found on PATH or in elan; install "
                  "Lean " + tc.version + " (elan toolchain install "
                  "leanprover/lean4:" + tc.version + ")");
    }
    const ProcessResult pr = run_process({r.path, "--version"}, {}, 60.0);
    std::smatch m;
    static const std::regex kVersion(R"(version (\d+\.\d+\.\d+[^,\s]*))");
    if (pr.spawn_failed || pr.exit_code != 0 ||
        !std::regex_search(pr.output, m, kVersion)) {
      throw Error(ErrorCode::kToolchainMissing,
                  "`" + r.path + " --version` failed: " + trim(pr.output));
    }
    r.version = m[1];
    it = cache.emplace(tc.lean, r).first;
  }
  const std::string want =
      tc.version.rfind('v', 0) == 0 ? tc.version.substr(1) : tc.version;
  if (it->second.version != want && !tc.allow_version_mismatch) {
    throw Error(ErrorCode::kToolchainMissing,
                "found Lean " + it->second.version + " but the corpus pins " +
                    tc.version + " (override with --allow-toolchain-mismatch)");
  }
  return it->second;
}

std::string diagnostics(const std::string& output) {
  static const std::regex kError(R"(^.*:\d+:\d+: error\b.*$|^error\b.*$)",
                                 std::regex::multiline);
  std::string detail;
  int kept = 0;
  for (auto it = std::sregex_iterator(output.begin(), output.end(), kError);
       it != std::sregex_iterator() && kept < 20; ++it, ++kept) {
    detail += (detail.empty() ? "" : "\n") + it->str();
  }
  return detail;
}

// Result when static checks decide the verdict; the file source otherwise.
std::optional<VerificationResult> static_verdict(const Corpus& corpus,
                                                 std::size_t ordinal,
                                                 std::string_view code,
                                                 const TacticPolicy& policy,
                                                 std::string* source) {
  try {
    *source = assemble_file(corpus, ordinal, code);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kMalformedCandidate) throw;
    return VerificationResult{Verdict::kMalformed, e.message(), 0.0};
  }
  const TacticCheck check = check_tactics(code, policy);
  if (!check.ok) {
    return VerificationResult{Verdict::kForbiddenTactic, check.name, 0.0};
  }
  return std::nullopt;
}

template <typename Fn>
void parallel_for(std::size_t n, int concurrency, const Fn& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(
      n, concurrency > 0 ? static_cast<std::size_t>(concurrency) : hw);
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex mu;
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      try {
        for (std::size_t i = next++; i < n; i = next++) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!fatal) fatal = std::current_exception();
        next = n;
      }
    });
  }
  for (auto& t : threads) t.join();
  if (fatal) std::rethrow_exception(fatal);
}

}  // namespace

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "pass";
    case Verdict::kCompileError: return "compile_error";
    case Verdict::kForbiddenTactic: return "forbidden_tactic";
    case Verdict::kTimeout: return "timeout";
    case Verdict::kMalformed: return "malformed";
  }
  return "malformed";
}

Verdict verdict_from_name(std::string_view name) {
  for (Verdict v : {Verdict::kPass, Verdict::kCompileError,
                    Verdict::kForbiddenTactic, Verdict::kTimeout,
                    Verdict::kMalformed}) {
    if (verdict_name(v) == name) return v;
  }
  throw Error(ErrorCode::kIoError, "unknown verdict " + std::string(name));
}

TacticPolicy TacticPolicy::for_corpus(const Corpus& corpus) {
  TacticPolicy p;
  p.whitelist = corpus.tactic_whitelist;
  p.forbidden_examples = forbidden_tactic_names();
  return p;
}

void TacticPolicy::validate() const {
  for (const auto& t : whitelist) {
    if (forbidden_examples.count(t)) {
      throw Error(ErrorCode::kConfigError,
                  "whitelisted tactic `" + t + "` is on the forbidden list");
    }
  }
}

TacticCheck check_tactics(std::string_view proof_code,
                          const TacticPolicy& policy) {
  std::vector<Token> tokens;
  try {
    tokens = tokenize(proof_code);
  } catch (const Error&) {
    return {};  // unlexable code is for the compiler to reject
  }
  for (std::size_t i : tactic_head_indices(tokens)) {
    const Token& t = tokens[i];
    if (t.kind != TokenKind::kIdentifier && t.kind != TokenKind::kKeyword) {
      continue;
    }
    if (!policy.whitelist.count(t.text)) return {false, t.text};
  }
  return {};
}

std::string assemble_file(const Corpus& corpus, std::size_t theorem_ordinal,
                          std::string_view proof_code) {
  const auto positions = corpus.theorem_positions();
  if (theorem_ordinal >= positions.size()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "theorem " + std::to_string(theorem_ordinal));
  }
  const std::string body = candidate_body(proof_code);
  const std::size_t target = positions[theorem_ordinal];
  std::string out = "namespace " + std::string(kBenchNamespace) + "\n\n";
  for (std::size_t i = 0; i < target; ++i) {
    const Declaration& d = corpus.declarations[i];
    out += trim(render(std::span<const Token>(d.tokens).subspan(d.keyword_index)));
    out += "\n\n";
  }
  out += trim(render(corpus.declarations[target].statement())) + " := " + body;
  out += "\n\nend " + std::string(kBenchNamespace) + "\n";
  return out;
}

std::string ensure_toolchain(const Toolchain& toolchain) {
  return resolve(toolchain).version;
}

VerificationResult compile_candidate(std::string_view source,
                                     const Toolchain& toolchain,
                                     double timeout_seconds) {
  if (!(timeout_seconds > 0)) {
    throw Error(ErrorCode::kConfigError, "compile timeout must be positive");
  }
  const ResolvedLean lean = resolve(toolchain);
  std::string dir_template =
      (fs::temp_directory_path() / "onng-verify-XXXXXX").string();
  if (::mkdtemp(dir_template.data()) == nullptr) {
    throw Error(ErrorCode::kIoError, "cannot create a temp directory");
  }
  const fs::path dir = dir_template;
  write_file(dir / "Candidate.lean", source);
  const ProcessResult pr =
      run_process({lean.path, "Candidate.lean"}, dir, timeout_seconds);
  std::error_code ignored;
  fs::remove_all(dir, ignored);

  VerificationResult r;
  r.compile_seconds = pr.seconds;
  if (pr.spawn_failed) {
    throw Error(ErrorCode::kToolchainMissing, "cannot run " + lean.path);
  }
  if (pr.timed_out) {
    r.verdict = Verdict::kTimeout;
    r.detail = "killed after " + std::to_string(timeout_seconds) + " s";
    return r;
  }
  const std::string errors = diagnostics(pr.output);
  const bool uses_sorry =
      pr.output.find("declaration uses 'sorry'") != std::string::npos;
  if (pr.exit_code == 0 && errors.empty() && !uses_sorry) {
    r.verdict = Verdict::kPass;
    r.detail = trim(pr.output);
    return r;
  }
  r.verdict = Verdict::kCompileError;
  r.detail = !errors.empty() ? errors
             : uses_sorry    ? "declaration uses 'sorry'"
                             : "exit status " + std::to_string(pr.exit_code) +
                                   ": " + trim(pr.output).substr(0, 2000);
  return r;
}

VerificationResult verify_candidate(const Corpus& corpus,
                                    std::size_t theorem_ordinal,
                                    std::string_view proof_code,
                                    const TacticPolicy& policy,
                                    const Toolchain& toolchain,
                                    double timeout_seconds) {
  std::string source;
  if (auto decided =
          static_verdict(corpus, theorem_ordinal, proof_code, policy, &source)) {
    return *decided;
  }
  return compile_candidate(source, toolchain, timeout_seconds);
}

nlohmann::ordered_json verdict_to_json(const VerdictRecord& r) {
  nlohmann::ordered_json j;
  j["theorem_id"] = r.theorem_id;
  j["lambda"] = r.lambda;
  j["trial"] = r.trial;
  j["verdict"] = verdict_name(r.result.verdict);
  j["compile_seconds"] = r.result.compile_seconds;
  j["detail"] = r.result.detail;
  return j;
}

VerdictRecord verdict_from_json(const nlohmann::json& j) {
  VerdictRecord r;
  r.theorem_id = j.at("theorem_id").get<std::string>();
  r.lambda = j.at("lambda").get<double>();
  r.trial = j.at("trial").get<int>();
  r.result.verdict = verdict_from_name(j.at("verdict").get<std::string>());
  r.result.compile_seconds = j.value("compile_seconds", 0.0);
  r.result.detail = j.value("detail", "");
  return r;
}

std::vector<VerdictRecord> load_verdicts(const fs::path& path) {
  std::vector<VerdictRecord> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(verdict_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kIoError, path.string() + ": " + e.what());
    }
  }
  return out;
}

void save_verdicts(const std::vector<VerdictRecord>& records,
                   const fs::path& path) {
  std::string text;
  for (const auto& r : records) text += verdict_to_json(r).dump() + "\n";
  write_file(path, text);
}

std::size_t theorem_ordinal_of(const std::string& theorem_id) {
  if (theorem_id.rfind("thm-", 0) != 0 || theorem_id.size() < 5) {
    throw Error(ErrorCode::kIndexOutOfRange, "bad theorem id " + theorem_id);
  }
  const int n = std::atoi(theorem_id.c_str() + 4);
  if (n < 1) throw Error(ErrorCode::kIndexOutOfRange, "bad theorem id " + theorem_id);
  return static_cast<std::size_t>(n - 1);
}

std::vector<VerdictRecord> verify_attempts(
    const std::vector<Attempt>& attempts,
    const std::map<double, Corpus>& corpora, const VerifyOptions& options) {
  std::vector<VerdictRecord> out(attempts.size());
  struct Job {
    const Corpus* corpus;
    std::size_t ordinal;
    std::string source;
    VerificationResult result;
  };
  std::vector<Job> jobs;
  std::map<std::string, std::size_t> job_of;  // dedupe key -> job
  std::vector<std::optional<std::size_t>> pending(attempts.size());

  for (std::size_t i = 0; i < attempts.size(); ++i) {
    const Attempt& a = attempts[i];
    out[i].theorem_id = a.theorem_id;
    out[i].lambda = a.lambda;
    out[i].trial = a.trial;
    if (!a.parsed) {
      out[i].result = {Verdict::kMalformed,
                       "no usable reply: " + a.error_code + ": " + a.error, 0.0};
      continue;
    }
    auto c = corpora.find(a.lambda);
    if (c == corpora.end()) {
      throw Error(ErrorCode::kConfigError,
                  "no corpus for lambda " + format_lambda(a.lambda));
    }
    const std::size_t ordinal = theorem_ordinal_of(a.theorem_id);
    const TacticPolicy policy = TacticPolicy::for_corpus(c->second);
    std::string source;
    if (auto decided =
            static_verdict(c->second, ordinal, a.parsed->code, policy, &source)) {
      out[i].result = *decided;
      continue;
    }
    const std::string key = format_lambda(a.lambda) + "|" + a.theorem_id + "|" +
                            a.parsed->code;
    auto [it, inserted] = job_of.emplace(key, jobs.size());
    if (inserted) jobs.push_back({&c->second, ordinal, std::move(source), {}});
    pending[i] = it->second;
  }

  if (!jobs.empty()) ensure_toolchain(options.toolchain);  // fail fast
  parallel_for(jobs.size(), options.concurrency, [&](std::size_t j) {
    jobs[j].result = compile_candidate(jobs[j].source, options.toolchain,
                                       options.timeout_seconds);
  });
  for (std::size_t i = 0; i < attempts.size(); ++i) {
    if (pending[i]) out[i].result = jobs[*pending[i]].result;
  }
  return out;
}

std::vector<VerdictRecord> verify_ground_truth(const Corpus& corpus,
                                               double lambda,
                                               const VerifyOptions& options) {
  std::vector<Attempt> attempts;
  const auto positions = corpus.theorem_positions();
  for (std::size_t k = 0; k < positions.size(); ++k) {
    Attempt a;
    a.theorem_id = theorem_id_for(k);
    a.lambda = lambda;
    a.responded = true;
    a.parsed = ModelResponse{
        "", trim(render(corpus.declarations[positions[k]].proof_body())), "",
        false};
    attempts.push_back(std::move(a));
  }
  return verify_attempts(attempts, {{lambda, corpus}}, options);
}

}  // namespace onng
