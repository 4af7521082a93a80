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

#ifndef ONNG_VERIFY_H_
#define ONNG_VERIFY_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "onng/corpus.h"
#include "onng/run_store.h"

namespace onng {

enum class Verdict { kPass, kCompileError, kForbiddenTactic, kTimeout, kMalformed };

std::string_view verdict_name(Verdict v);
Verdict verdict_from_name(std::string_view name);

struct VerificationResult {
  Verdict verdict = Verdict::kMalformed;
  std::string detail;
  double compile_seconds = 0.0;
};

struct TacticPolicy {
  std::set<std::string> whitelist;
  std::set<std::string> forbidden_examples;

  static TacticPolicy for_corpus(const Corpus& corpus);
  // ConfigError if the whitelist names a forbidden tactic.
  void validate() const;
};

struct TacticCheck {
  bool ok = true;
  // First offending tactic when !ok.
  std::string name;
};

TacticCheck check_tactics(std::string_view proof_code,
                          const TacticPolicy& policy);

// Namespace wrapping the assembled file, keeping corpus names clear of the
// toolchain's root namespace.
inline constexpr std::string_view kBenchNamespace = "OnngBench";

// Throws MalformedCandidate for empty code, sorry/admit, or code that
// opens further top-level commands.
std::string assemble_file(const Corpus& corpus, std::size_t theorem_ordinal,
                          std::string_view proof_code);

struct Toolchain {
  // Compiler binary; bare names are looked up on PATH, then in elan's bin.
  std::string lean = "lean";
  // Required version, e.g. "v4.27.0".
  std::string version = "v4.27.0";
  bool allow_version_mismatch = false;
};

// Resolves the binary and checks its version; ToolchainMissing otherwise.
// Returns the reported version string.
std::string ensure_toolchain(const Toolchain& toolchain);

inline constexpr double kDefaultCompileTimeout = 120.0;

VerificationResult compile_candidate(std::string_view source,
                                     const Toolchain& toolchain,
                                     double timeout_seconds);

// Static checks, then compilation, with the verdict precedence
// malformed > forbidden_tactic > timeout > compile_error > pass.
VerificationResult verify_candidate(const Corpus& corpus,
                                    std::size_t theorem_ordinal,
                                    std::string_view proof_code,
                                    const TacticPolicy& policy,
                                    const Toolchain& toolchain,
                                    double timeout_seconds);

struct VerdictRecord {
  std::string theorem_id;
  double lambda = 0.0;
  int trial = 1;
  VerificationResult result;
};

nlohmann::ordered_json verdict_to_json(const VerdictRecord& r);
VerdictRecord verdict_from_json(const nlohmann::json& j);
std::vector<VerdictRecord> load_verdicts(const std::filesystem::path& path);
void save_verdicts(const std::vector<VerdictRecord>& records,
                   const std::filesystem::path& path);

// Parses "thm-017" into ordinal 16.
std::size_t theorem_ordinal_of(const std::string& theorem_id);

struct VerifyOptions {
  Toolchain toolchain;
  double timeout_seconds = kDefaultCompileTimeout;
  // Compiler processes in flight; 0 means hardware concurrency.
  int concurrency = 0;
};

// One verdict per attempt, in attempt order. Identical (lambda, theorem,
// code) candidates are compiled once.
std::vector<VerdictRecord> verify_attempts(
    const std::vector<Attempt>& attempts,
    const std::map<double, Corpus>& corpora, const VerifyOptions& options);

// Compiles every theorem's own (renamed) proof; the compile-back check.
std::vector<VerdictRecord> verify_ground_truth(const Corpus& corpus,
                                               double lambda,
                                               const VerifyOptions& options);

}  // namespace onng

#endif  // ONNG_VERIFY_H_
