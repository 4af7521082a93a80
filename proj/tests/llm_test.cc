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

#include "onng/llm.h"

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "onng/corpus_io.h"
#include "onng/error.h"
#include "onng/mock_server.h"
#include "onng/obfuscate.h"

namespace onng {
namespace {

namespace fs = std::filesystem;

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

fs::path TempPath(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() /
                       ("onng_llm_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const fs::path p = dir / name;
  fs::remove(p);
  return p;
}

ModelEndpoint Endpoint(const MockServer& server) {
  ModelEndpoint ep;
  ep.base_url = server.base_url();
  ep.model_id = "mock";
  ep.request_timeout = 30;
  ep.max_retries = 2;
  ep.retry_backoff = 0.01;
  return ep;
}

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kIoError;
}

TEST(QueryModelTest, CannedReplyReturnedVerbatim) {
  MockBehavior b;
  b.canned_reply = "{\"Draft\":\"x\",\"Code\":\"by rfl\"}\n";
  MockServer server(b);
  const Query q = build_query(Reference(), 0, Template());
  const QueryResult r = query_model(Endpoint(server), q);
  EXPECT_EQ(r.raw_text, b.canned_reply);
  EXPECT_GT(r.latency_seconds, 0.0);
  EXPECT_EQ(r.retries, 0);
}

TEST(QueryModelTest, MessagesStyle) {
  MockBehavior b;
  b.api_style = "messages";
  MockServer server(b);
  ModelEndpoint ep = Endpoint(server);
  ep.api_style = "messages";
  ep.path = "/v1/messages";
  EXPECT_EQ(query_model(ep, build_query(Reference(), 0, Template())).raw_text,
            b.canned_reply);
}

TEST(QueryModelTest, UnreachableHostIsTransportError) {
  int port = 0;
  {
    MockServer probe(MockBehavior{});
    port = probe.port();
  }
  ModelEndpoint ep;
  ep.base_url = "http://127.0.0.1:" + std::to_string(port);
  ep.max_retries = 2;
  ep.retry_backoff = 0.01;
  EXPECT_EQ(CodeOf([&] {
              query_model(ep, build_query(Reference(), 0, Template()));
            }),
            ErrorCode::kTransportError);
}

TEST(QueryModelTest, TimeoutAgainstSlowMock) {
  MockBehavior b;
  b.fixed_delay = 10.0;
  MockServer server(b);
  ModelEndpoint ep = Endpoint(server);
  ep.request_timeout = 1.0;
  const auto start = std::chrono::steady_clock::now();
  EXPECT_EQ(CodeOf([&] {
              query_model(ep, build_query(Reference(), 0, Template()));
            }),
            ErrorCode::kTimeout);
  const double elapsed = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
  EXPECT_LT(elapsed, 3.0);
}

TEST(QueryModelTest, RetriesTransientFailuresAndTimesOnlySuccess) {
  MockBehavior b;
  b.fail_first = 2;
  b.fail_status = 503;
  MockServer server(b);
  ModelEndpoint ep = Endpoint(server);
  ep.retry_backoff = 0.2;
  const QueryResult r =
      query_model(ep, build_query(Reference(), 0, Template()));
  EXPECT_EQ(r.retries, 2);
  // Backoff sleeps (0.2 + 0.4 s) are not part of the measured latency.
  EXPECT_LT(r.latency_seconds, 0.5);
  EXPECT_EQ(server.requests(), 3);
}

TEST(QueryModelTest, RateLimitedAfterRetries) {
  MockBehavior b;
  b.fail_first = 100;
  b.fail_status = 429;
  MockServer server(b);
  EXPECT_EQ(CodeOf([&] {
              query_model(Endpoint(server),
                          build_query(Reference(), 0, Template()));
            }),
            ErrorCode::kRateLimited);
  EXPECT_EQ(server.requests(), 3);
}

TEST(QueryModelTest, AuthFailureIsNotRetried) {
  MockBehavior b;
  b.required_token = "secret";
  MockServer server(b);
  ModelEndpoint ep = Endpoint(server);
  ::setenv("ONNG_TEST_TOKEN", "wrong", 1);
  ep.auth_token_env = "ONNG_TEST_TOKEN";
  EXPECT_EQ(CodeOf([&] {
              query_model(ep, build_query(Reference(), 0, Template()));
            }),
            ErrorCode::kAuthFailure);
  EXPECT_EQ(server.requests(), 1);
  ::setenv("ONNG_TEST_TOKEN", "secret", 1);
  EXPECT_NO_THROW(query_model(ep, build_query(Reference(), 0, Template())));
}

TEST(QueryModelTest, MalformedEnvelope) {
  httplib::Server raw;
  raw.Post(".*", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("not json", "text/plain");
  });
  const int port = raw.bind_to_any_port("127.0.0.1");
  std::thread t([&] { raw.listen_after_bind(); });
  raw.wait_until_ready();
  ModelEndpoint ep;
  ep.base_url = "http://127.0.0.1:" + std::to_string(port);
  EXPECT_EQ(CodeOf([&] {
              query_model(ep, build_query(Reference(), 0, Template()));
            }),
            ErrorCode::kMalformedResponse);
  raw.stop();
  t.join();
}

BenchmarkPlan Plan(const MockServer& server, int concurrency) {
  BenchmarkPlan plan;
  plan.endpoint = Endpoint(server);
  plan.concurrency_limit = concurrency;
  return plan;
}

std::map<double, Corpus> SameCorpusAtEveryLevel() {
  std::map<double, Corpus> corpora;
  for (double l : BenchmarkPlan{}.lambda_levels) corpora[l] = Reference();
  return corpora;
}

TEST(RunBenchmarkTest, FullGridThenResume) {
  MockServer server(MockBehavior{});
  const fs::path path = TempPath("grid.jsonl");
  {
    RunStore store(path);
    const auto attempts = run_benchmark(Plan(server, 32), SameCorpusAtEveryLevel(),
                                        Template(), store);
    EXPECT_EQ(attempts.size(), 68u * 6u * 5u);
    std::set<std::string> keys;
    for (const Attempt& a : attempts) {
      EXPECT_TRUE(a.ok()) << a.error;
      EXPECT_TRUE(a.responded);
      EXPECT_GT(a.latency_seconds, 0.0);
      EXPECT_LE(a.latency_seconds, 30.0);
      keys.insert(attempt_key(a));
    }
    EXPECT_EQ(keys.size(), 2040u);
  }

  // Simulate a crash after 1000 records, mid-way through the 1001st.
  const std::string text = read_file(path);
  std::size_t cut = 0;
  for (int i = 0; i < 1000; ++i) cut = text.find('\n', cut) + 1;
  const std::size_t half = text.find('\n', cut);
  write_file(path, text.substr(0, cut + (half - cut) / 2));

  MockServer again(MockBehavior{});
  RunStore store(path);
  EXPECT_EQ(store.existing().size(), 1000u);
  const auto resumed = run_benchmark(Plan(again, 32), SameCorpusAtEveryLevel(),
                                     Template(), store);
  EXPECT_EQ(resumed.size(), 1040u);
  EXPECT_EQ(again.requests(), 1040);
  EXPECT_EQ(load_attempts(path).size(), 2040u);

  // Nothing left to do.
  MockServer idle(MockBehavior{});
  RunStore done(path);
  EXPECT_TRUE(run_benchmark(Plan(idle, 4), SameCorpusAtEveryLevel(),
                            Template(), done)
                  .empty());
  EXPECT_EQ(idle.requests(), 0);
}

TEST(RunBenchmarkTest, ConcurrencyLimitRespected) {
  MockBehavior b;
  b.fixed_delay = 0.02;
  MockServer server(b);
  BenchmarkPlan plan = Plan(server, 4);
  plan.lambda_levels = {0.0};
  plan.trials_per_cell = 1;
  RunStore store(TempPath("limit.jsonl"));
  std::map<double, Corpus> corpora{{0.0, Reference()}};
  run_benchmark(plan, corpora, Template(), store);
  EXPECT_LE(server.max_in_flight(), 4);
  EXPECT_GE(server.max_in_flight(), 2);
}

TEST(RunBenchmarkTest, FailuresAreRecordedNotRaised) {
  MockBehavior b;
  b.kind = MockKind::kGarbage;
  MockServer server(b);
  BenchmarkPlan plan = Plan(server, 8);
  plan.lambda_levels = {0.0};
  plan.trials_per_cell = 1;
  RunStore store(TempPath("garbage.jsonl"));
  const auto attempts = run_benchmark(plan, {{0.0, Reference()}}, Template(), store);
  ASSERT_EQ(attempts.size(), 68u);
  for (const Attempt& a : attempts) {
    EXPECT_EQ(a.error_code, "MalformedResponse");
    EXPECT_TRUE(a.responded);
    EXPECT_FALSE(a.parsed.has_value());
  }
}

TEST(RunBenchmarkTest, MissingCorpusOrTokenIsConfigError) {
  MockServer server(MockBehavior{});
  RunStore store(TempPath("config.jsonl"));
  EXPECT_EQ(CodeOf([&] {
              run_benchmark(Plan(server, 1), {{0.0, Reference()}}, Template(),
                            store);
            }),
            ErrorCode::kConfigError);
  BenchmarkPlan plan = Plan(server, 1);
  plan.lambda_levels = {0.0};
  plan.endpoint.auth_token_env = "ONNG_SURELY_UNSET_VARIABLE";
  EXPECT_EQ(CodeOf([&] {
              run_benchmark(plan, {{0.0, Reference()}}, Template(), store);
            }),
            ErrorCode::kConfigError);
  EXPECT_EQ(server.requests(), 0);
}

TEST(MockServerTest, OracleRepliesWithRenamedProof) {
  ObfuscationParams p;
  p.lambda = 1.0;
  const Corpus obf = apply_rename(Reference(), build_rename_map(Reference(), p));
  MockBehavior b;
  b.kind = MockKind::kOracle;
  MockServer server(b, {{1.0, obf}});
  const QueryResult r = query_model(Endpoint(server),
                                    build_query(obf, 0, Template()),
                                    "thm-001;1;1");
  const ModelResponse m = parse_response(r.raw_text);
  const auto& target = obf.declarations[obf.theorem_positions()[0]];
  EXPECT_NE(render(target.proof_body()).find(m.code), std::string::npos);
  EXPECT_EQ(m.code.rfind("by", 0), 0u);
}

TEST(RunStoreTest, CorruptMiddleLineIsAnError) {
  const fs::path path = TempPath("corrupt.jsonl");
  Attempt a;
  a.theorem_id = "thm-001";
  const std::string good = attempt_to_json(a).dump() + "\n";
  write_file(path, good + "{broken\n" + good);
  EXPECT_THROW(load_attempts(path), Error);
}

TEST(RunStoreTest, RoundTripsParsedAndFailedAttempts) {
  const fs::path path = TempPath("roundtrip.jsonl");
  Attempt ok;
  ok.theorem_id = "thm-002";
  ok.lambda = 0.2;
  ok.trial = 3;
  ok.responded = true;
  ok.latency_seconds = 1.25;
  ok.parsed = ModelResponse{"plan", "by rfl", "", false};
  Attempt bad = ok;
  bad.trial = 4;
  bad.parsed.reset();
  bad.error_code = "Timeout";
  bad.error = "no reply";
  {
    RunStore store(path);
    store.append(ok);
    store.append(bad);
  }
  const auto back = load_attempts(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].parsed->code, "by rfl");
  EXPECT_EQ(back[0].lambda, 0.2);
  EXPECT_EQ(attempt_key(back[1]), "thm-002|0.2|4");
  EXPECT_EQ(back[1].error_code, "Timeout");
}

}  // namespace
}  // namespace onng
