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

#include <random>

#include <gtest/gtest.h>

#include "onng/corpus_io.h"
#include "onng/error.h"
#include "onng/obfuscate.h"

namespace onng {
namespace {

const Corpus& Reference() {
  static const Corpus kCorpus =
      load_corpus_dir(std::string(ONNG_TEST_DATA) + "/reference");
  return kCorpus;
}

const std::string& Template() {
  static const std::string kText =
      read_file(std::string(ONNG_TEST_DATA) + "/prompt_template.txt");
  return kText;
}

std::size_t Count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto at = hay.find(needle); at != std::string::npos;
       at = hay.find(needle, at + 1)) {
    ++n;
  }
  return n;
}

TEST(BuildQueryTest, FirstTheoremHasNoPriorTheorems) {
  const Query q = build_query(Reference(), 0, Template());
  EXPECT_EQ(q.theorem_id, "thm-001");
  EXPECT_EQ(q.prior_theorems_block, "(none)");
  EXPECT_NE(q.definitions_block.find("inductive MyNat"), std::string::npos);
  EXPECT_NE(q.definitions_block.find("axiom add_succ"), std::string::npos);
  EXPECT_EQ(q.target_statement,
            "theorem zero_add (n : MyNat) : MyNat.zero ⊞ n = n");
  EXPECT_NE(q.system_preamble.find("Lean 4"), std::string::npos);
  EXPECT_EQ(q.rendered.find("=== user ==="), std::string::npos);
}

TEST(BuildQueryTest, PriorStatementsInOrderWithoutProofs) {
  const Corpus& c = Reference();
  const auto positions = c.theorem_positions();
  const std::size_t k = 10;
  const Query q = build_query(c, k, Template());
  std::size_t last = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const std::string stmt = c.declarations[positions[j]].name;
    const auto at = q.prior_theorems_block.find("theorem " + stmt + " ");
    ASSERT_NE(at, std::string::npos) << stmt;
    EXPECT_GE(at, last);
    last = at;
  }
  EXPECT_EQ(Count(q.prior_theorems_block, "theorem "), k);
  EXPECT_EQ(q.prior_theorems_block.find(":= by"), std::string::npos);
  EXPECT_EQ(q.rendered.find("induction n with"), std::string::npos);
}

TEST(BuildQueryTest, TacticsListedOnceAndSchemaVerbatim) {
  const Query q = build_query(Reference(), 5, Template());
  const auto line_at = q.rendered.find("Allowed tactics: ");
  ASSERT_NE(line_at, std::string::npos);
  const std::string line =
      q.rendered.substr(line_at, q.rendered.find('\n', line_at) - line_at);
  for (const std::string& t : Reference().tactic_whitelist) {
    EXPECT_EQ(Count(line + ",", " " + t + ","), 1u) << t;
  }
  EXPECT_NE(q.rendered.find(schema_instruction()), std::string::npos);
}

TEST(BuildQueryTest, SchemaAppendedWhenTemplateOmitsIt) {
  const Query q = build_query(Reference(), 0, "Prove {{target}}.");
  EXPECT_NE(q.rendered.find(schema_instruction()), std::string::npos);
}

TEST(BuildQueryTest, UnknownPlaceholderRejected) {
  EXPECT_THROW(build_query(Reference(), 0, "{{nope}}"), Error);
}

TEST(BuildQueryTest, IndexOutOfRange) {
  try {
    build_query(Reference(), 68, Template());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIndexOutOfRange);
  }
}

TEST(BuildQueryTest, MonotoneContext) {
  const Corpus& c = Reference();
  std::string previous;
  for (std::size_t k = 0; k < c.theorem_count(); ++k) {
    const Query q = build_query(c, k, Template());
    if (k > 0) {
      for (std::size_t j = 0; j + 1 < k; ++j) {
        const auto& d = c.declarations[c.theorem_positions()[j]];
        EXPECT_NE(q.prior_theorems_block.find(render(d.statement()).substr(0, 20)),
                  std::string::npos);
      }
      EXPECT_EQ(q.prior_theorems_block.rfind(previous, 0), 0u) << k;
    }
    previous = q.prior_theorems_block == "(none)" ? "" : q.prior_theorems_block;
  }
}

TEST(BuildQueryTest, NoChangedOriginalNameLeaks) {
  const Corpus& c = Reference();
  for (double lambda : {0.2, 0.6, 1.0}) {
    ObfuscationParams p;
    p.lambda = lambda;
    const RenameMap map = build_rename_map(c, p);
    const Corpus obf = apply_rename(c, map);
    std::set<std::string> values;
    for (const auto& [k, v] : map.entries) values.insert(v);
    for (std::size_t k = 0; k < obf.theorem_count(); k += 7) {
      const Query q = build_query(obf, k, Template());
      for (const Token& t : tokenize(q.definitions_block + "\n" +
                                     q.prior_theorems_block + "\n" +
                                     q.target_statement)) {
        if (t.kind != TokenKind::kIdentifier && t.kind != TokenKind::kSymbol) {
          continue;
        }
        auto it = map.entries.find(t.text);
        if (it != map.entries.end() && it->second != t.text) {
          EXPECT_TRUE(values.count(t.text)) << t.text << " leaked";
        }
      }
    }
  }
}

TEST(ParseResponseTest, BareObject) {
  const auto r = parse_response(R"({"Draft":"use induction","Code":"by rfl"})");
  EXPECT_EQ(r.draft, "use induction");
  EXPECT_EQ(r.code, "by rfl");
  EXPECT_FALSE(r.draft_missing);
}

TEST(ParseResponseTest, FencedObjectIsIdentical) {
  const auto a = parse_response(R"({"Draft":"use induction","Code":"by rfl"})");
  const auto b = parse_response(
      "Sure, here it is:\n```json\n{\"Draft\":\"use induction\",\"Code\":\"by "
      "rfl\"}\n```\n");
  EXPECT_EQ(a.draft, b.draft);
  EXPECT_EQ(a.code, b.code);
}

TEST(ParseResponseTest, CodeFenceStripped) {
  const auto r = parse_response(
      R"({"Draft":"d","Code":"```lean\nby\n  rw [h]\n```"})");
  EXPECT_EQ(r.code, "by\n  rw [h]");
}

TEST(ParseResponseTest, BracesInsideStringsAndLeadingNoise) {
  const auto r = parse_response(
      R"(notes {not json} then {"Draft":"a } b","Code":"by exact ⟨x, h⟩"})");
  EXPECT_EQ(r.draft, "a } b");
  EXPECT_EQ(r.code, "by exact ⟨x, h⟩");
}

TEST(ParseResponseTest, MissingCode) {
  try {
    parse_response(R"({"Draft":"..."})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingField);
    EXPECT_NE(std::string(e.what()).find("Code"), std::string::npos);
  }
}

TEST(ParseResponseTest, MissingDraftRecorded) {
  const auto r = parse_response(R"({"Code":"by rfl"})");
  EXPECT_TRUE(r.draft_missing);
}

TEST(ParseResponseTest, NoObject) {
  try {
    parse_response("I cannot help with that.");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedResponse);
  }
}

TEST(ParseResponseTest, TotalOnArbitraryBytes) {
  std::mt19937_64 gen(123);
  const std::string alphabet = "{}\"\\:,abc \n`\xff\xc3";
  for (int i = 0; i < 20000; ++i) {
    std::string s(gen() % 64, ' ');
    for (char& c : s) {
      c = (i % 2) ? alphabet[gen() % alphabet.size()]
                  : static_cast<char>(gen() & 0xFF);
    }
    try {
      parse_response(s);
    } catch (const Error&) {
    }
  }
}

}  // namespace
}  // namespace onng
