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

#ifndef ONNG_MOCK_SERVER_H_
#define ONNG_MOCK_SERVER_H_

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "onng/corpus.h"

namespace httplib {
class Server;
}

namespace onng {

enum class MockKind {
  // Replies with `canned_reply` as the message text.
  kCanned,
  // Replies with the renamed ground-truth proof of the requested theorem.
  kOracle,
  // Replies with prose that contains no JSON object.
  kGarbage,
  // Canned reply after a latency of base (+ shift when lambda > 0) plus
  // Gaussian noise, deterministic per attempt.
  kScriptedDelay,
};

struct MockBehavior {
  MockKind kind = MockKind::kCanned;
  std::string canned_reply = R"({"Draft":"","Code":"by rfl"})";
  std::string api_style = "chat-completions";
  // Added to every reply.
  double fixed_delay = 0.0;
  double base_latency = 0.5;
  double shift = 2.0;
  double sigma = 0.2;
  std::uint64_t seed = 1;
  // The first `fail_first` requests are answered with `fail_status`.
  int fail_first = 0;
  int fail_status = 503;
  // When set, requests must carry "Authorization: Bearer <token>".
  std::string required_token;
};

// In-process HTTP endpoint on 127.0.0.1 speaking the benchmark's wire format.
class MockServer {
 public:
  // `oracle_corpora` maps lambda to the corpus whose proofs kOracle replays.
  explicit MockServer(MockBehavior behavior,
                      std::map<double, Corpus> oracle_corpora = {},
                      int port = 0);
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  int port() const { return port_; }
  std::string base_url() const;
  int max_in_flight() const { return max_in_flight_; }
  int requests() const { return requests_; }
  // Blocks until stop() from another thread (used by `onng mock-serve`).
  void wait();
  void stop();

 private:
  std::string reply_text(const std::string& attempt, double* delay) const;
  bool sleep_interruptibly(double seconds);

  MockBehavior behavior_;
  std::map<std::string, std::map<std::string, std::string>> oracle_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_in_flight_{0};
  std::atomic<int> requests_{0};
  std::mutex mu_;
  std::condition_variable cv_;
  bool stopping_ = false;
};

}  // namespace onng

#endif  // ONNG_MOCK_SERVER_H_
