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

#include <sys/stat.h>

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "onng/corpus_io.h"
#include "onng/error.h"
#include "onng/obfuscate.h"
#include "onng/run_store.h"

namespace onng {
namespace {

namespace fs = std::filesystem;

const Corpus& reference() {
  static const Corpus corpus =
      load_corpus_dir(std::string(ONNG_TEST_DATA) + "/reference");
  return corpus;
}

// A stand-in compiler whose behaviour is keyed on markers in the source.
fs::path fake_lean(const std::string& version) {
  const fs::path dir = fs::temp_directory_path() / ("onng-fake-lean-" + version);
  fs::create_directories(dir);
  const fs::path script = dir / "lean";
  std::ofstream(script) << "#!/bin/sh\n"
      "if [ \"$1\" = --version ]; then\n"
      "  echo \"Lean (version " << version
      << ", x86_64-unknown-linux-gnu, commit 0, Release)\"; exit 0; fi\n"
      "if grep -q MARK_FAIL \"$1\"; then\n"
      "  echo \"$1:7:2: error: unsolved goals\"; exit 1; fi\n"
      "if grep -q MARK_SLEEP \"$1\"; then sleep 30; fi\n"
      "if grep -q MARK_SORRY \"$1\"; then\n"
      "  echo \"$1:7:8: warning: declaration uses 'sorry'\"; exit 0; fi\n"
      "exit 0\n";
  ::chmod(script.c_str(), 0755);
  return script;
}

Toolchain fake_toolchain() {
  Toolchain tc;
  tc.lean = fake_lean("4.27.0").string();
  return tc;
}

TEST(CheckTactics, WhitelistedProofPasses) {
  const auto policy = TacticPolicy::for_corpus(reference());
  EXPECT_TRUE(check_tactics("by induction n with d hd; rw [h]", policy).ok);
  EXPECT_TRUE(check_tactics(
      "by\n  induction n with\n  | zero => rw [add_zero]\n"
      "  | succ d hd => rw [add_succ, hd]", policy).ok);
}

TEST(CheckTactics, ForbiddenTacticIsNamed) {
  const auto policy = TacticPolicy::for_corpus(reference());
  const TacticCheck c = check_tactics("by simp", policy);
  EXPECT_FALSE(c.ok);
  EXPECT_EQ(c.name, "simp");
  EXPECT_EQ(check_tactics("by\n  rw [h]\n  omega", policy).name, "omega");
  EXPECT_EQ(check_tactics("by rw [h] <;> decide", policy).name, "decide");
}

TEST(CheckTactics, CommentsAndStringsAreIgnored) {
  const auto policy = TacticPolicy::for_corpus(reference());
  EXPECT_TRUE(check_tactics("-- simp would work\nby rfl", policy).ok);
  EXPECT_TRUE(check_tactics("by /- simp -/ rfl", policy).ok);
}

TEST(TacticPolicy, RejectsForbiddenWhitelistEntry) {
  auto policy = TacticPolicy::for_corpus(reference());
  EXPECT_NO_THROW(policy.validate());
  policy.whitelist.insert("simp");
  EXPECT_THROW(policy.validate(), Error);
}

TEST(AssembleFile, WrapsPriorDeclarationsAndTarget) {
  const std::string src = assemble_file(reference(), 0, "by rfl");
  EXPECT_EQ(src.rfind("namespace OnngBench\n", 0), 0u);
  EXPECT_NE(src.find("inductive MyNat where"), std::string::npos);
  EXPECT_NE(src.find("theorem zero_add (n : MyNat) : MyNat.zero ⊞ n = n := by rfl"),
            std::string::npos);
  EXPECT_EQ(src.find("succ_add"), std::string::npos);
  EXPECT_NE(src.find("\nend OnngBench\n"), std::string::npos);
}

TEST(AssembleFile, RestatedTheoremKeepsOnlyItsProof) {
  const std::string src = assemble_file(
      reference(), 0, "theorem zero_add (n : MyNat) : n = n := by exact h");
  EXPECT_NE(src.find("MyNat.zero ⊞ n = n := by exact h"), std::string::npos);
  EXPECT_EQ(src.find(": n = n"), std::string::npos);
}

TEST(AssembleFile, RejectsMalformedCandidates) {
  for (const char* code :
       {"", "   ", "by sorry", "by\n  rw [h]\n  admit", "sorryAx _",
        "by rfl\ntheorem x : True := trivial", "by rfl\n#eval 1"}) {
    try {
      assemble_file(reference(), 0, code);
      ADD_FAILURE() << "accepted: " << code;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kMalformedCandidate) << code;
    }
  }
  EXPECT_THROW(assemble_file(reference(), 68, "by rfl"), Error);
}

TEST(AssembleFile, ObfuscatedPreambleHidesChangedNames) {
  ObfuscationParams p;
  p.lambda = 1.0;
  const RenameMap map = build_rename_map(reference(), p);
  const Corpus renamed = apply_rename(reference(), map);
  const std::string src = assemble_file(renamed, 67, "by rfl");
  const auto tokens = tokenize(src);
  std::set<std::string> spelled;
  for (const auto& t : tokens) spelled.insert(t.text);
  for (const auto& [from, to] : map.entries) {
    if (from != to) EXPECT_FALSE(spelled.count(from)) << from;
  }
}

TEST(Toolchain, MissingBinaryIsReported) {
  Toolchain tc;
  tc.lean = "/nonexistent/lean";
  try {
    ensure_toolchain(tc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kToolchainMissing);
  }
}

TEST(Toolchain, VersionMismatchIsFatalUnlessOverridden) {
  Toolchain tc;
  tc.lean = fake_lean("4.9.0").string();
  EXPECT_THROW(ensure_toolchain(tc), Error);
  tc.allow_version_mismatch = true;
  EXPECT_EQ(ensure_toolchain(tc), "4.9.0");
  EXPECT_EQ(ensure_toolchain(fake_toolchain()), "4.27.0");
}

TEST(Compile, ClassifiesCompilerOutcomes) {
  const Toolchain tc = fake_toolchain();
  EXPECT_EQ(compile_candidate("theorem t : True := trivial", tc, 10).verdict,
            Verdict::kPass);
  const auto err = compile_candidate("-- MARK_FAIL", tc, 10);
  EXPECT_EQ(err.verdict, Verdict::kCompileError);
  EXPECT_NE(err.detail.find("error: unsolved goals"), std::string::npos);
  EXPECT_EQ(compile_candidate("-- MARK_SORRY", tc, 10).verdict,
            Verdict::kCompileError);
  const auto slow = compile_candidate("-- MARK_SLEEP", tc, 1.0);
  EXPECT_EQ(slow.verdict, Verdict::kTimeout);
  EXPECT_LT(slow.compile_seconds, 5.0);
}

TEST(VerifyCandidate, StaticChecksPrecedeCompilation) {
  const auto policy = TacticPolicy::for_corpus(reference());
  Toolchain missing;
  missing.lean = "/nonexistent/lean";
  // Neither verdict needs a compiler.
  EXPECT_EQ(verify_candidate(reference(), 0, "by sorry", policy, missing, 10).verdict,
            Verdict::kMalformed);
  EXPECT_EQ(verify_candidate(reference(), 0, "by simp", policy, missing, 10).verdict,
            Verdict::kForbiddenTactic);
  EXPECT_THROW(verify_candidate(reference(), 0, "by rfl", policy, missing, 10),
               Error);
  EXPECT_EQ(verify_candidate(reference(), 0, "by exact MARK_FAIL", policy,
                             fake_toolchain(), 10).verdict,
            Verdict::kCompileError);
}

TEST(VerifyAttempts, MapsEveryAttemptAndDeduplicates) {
  std::vector<Attempt> attempts;
  auto add = [&](const std::string& code, bool parsed) {
    Attempt a;
    a.theorem_id = "thm-001";
    a.lambda = 0.0;
    a.trial = static_cast<int>(attempts.size());
    if (parsed) a.parsed = ModelResponse{"", code, "", false};
    else a.error_code = "malformed_response";
    attempts.push_back(a);
  };
  add("by rfl", true);
  add("by rfl", true);
  add("by simp", true);
  add("", false);
  add("by exact MARK_FAIL", true);
  VerifyOptions opts;
  opts.toolchain = fake_toolchain();
  opts.timeout_seconds = 10;
  const auto out = verify_attempts(attempts, {{0.0, reference()}}, opts);
  ASSERT_EQ(out.size(), 5u);
  EXPECT_EQ(out[0].result.verdict, Verdict::kPass);
  EXPECT_EQ(out[1].result.verdict, Verdict::kPass);
  EXPECT_EQ(out[2].result.verdict, Verdict::kForbiddenTactic);
  EXPECT_EQ(out[3].result.verdict, Verdict::kMalformed);
  EXPECT_EQ(out[4].result.verdict, Verdict::kCompileError);
  EXPECT_EQ(out[4].trial, 4);
}

TEST(VerifyAttempts, GarbageNeedsNoToolchain) {
  Attempt a;
  a.theorem_id = "thm-002";
  a.error_code = "malformed_response";
  VerifyOptions opts;
  opts.toolchain.lean = "/nonexistent/lean";
  const auto out = verify_attempts({a}, {{0.0, reference()}}, opts);
  EXPECT_EQ(out[0].result.verdict, Verdict::kMalformed);
}

TEST(VerifyGroundTruth, AllTheoremsReachTheCompiler) {
  VerifyOptions opts;
  opts.toolchain = fake_toolchain();
  const auto out = verify_ground_truth(reference(), 0.0, opts);
  ASSERT_EQ(out.size(), 68u);
  for (const auto& r : out) {
    EXPECT_EQ(r.result.verdict, Verdict::kPass) << r.theorem_id << r.result.detail;
  }
}

TEST(Verdicts, JsonRoundTrip) {
  VerdictRecord r{"thm-017", 0.4, 2, {Verdict::kTimeout, "killed", 120.5}};
  const fs::path path = fs::temp_directory_path() / "onng-verdicts.jsonl";
  save_verdicts({r, r}, path);
  const auto back = load_verdicts(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].theorem_id, "thm-017");
  EXPECT_EQ(back[1].result.verdict, Verdict::kTimeout);
  EXPECT_DOUBLE_EQ(back[1].result.compile_seconds, 120.5);
  EXPECT_EQ(theorem_ordinal_of("thm-017"), 16u);
  EXPECT_THROW(theorem_ordinal_of("x-1"), Error);
}

}  // namespace
}  // namespace onng
