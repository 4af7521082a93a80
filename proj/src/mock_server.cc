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

#include "onng/mock_server.h"

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "onng/error.h"
#include "onng/llm.h"
#include "onng/obfuscate.h"
#include "onng/promptgen.h"
#include "onng/run_store.h"

namespace onng {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string envelope(const std::string& style, const std::string& text) {
  nlohmann::json doc;
  if (style == "messages") {
    doc["type"] = "message";
    doc["role"] = "assistant";
    doc["content"] = {{{"type", "text"}, {"text", text}}};
  } else {
    doc["object"] = "chat.completion";
    doc["choices"] = {{{"index", 0},
                       {"message", {{"role", "assistant"}, {"content", text}}},
                       {"finish_reason", "stop"}}};
  }
  return doc.dump();
}

class InFlight {
 public:
  InFlight(std::atomic<int>& now, std::atomic<int>& peak) : now_(now) {
    const int n = ++now_;
    int seen = peak.load();
    while (n > seen && !peak.compare_exchange_weak(seen, n)) {
    }
  }
  ~InFlight() { --now_; }

 private:
  std::atomic<int>& now_;
};

}  // namespace

MockServer::MockServer(MockBehavior behavior,
                       std::map<double, Corpus> oracle_corpora, int port)
    : behavior_(std::move(behavior)),
      server_(std::make_unique<httplib::Server>()) {
  for (const auto& [lambda, corpus] : oracle_corpora) {
    auto& by_id = oracle_[format_lambda(lambda)];
    const auto positions = corpus.theorem_positions();
    for (std::size_t k = 0; k < positions.size(); ++k) {
      by_id[theorem_id_for(k)] =
          trim(render(corpus.declarations[positions[k]].proof_body()));
    }
  }

  server_->new_task_queue = [] { return new httplib::ThreadPool(256); };
  server_->Post(".*", [this](const httplib::Request& req,
                             httplib::Response& res) {
    InFlight guard(in_flight_, max_in_flight_);
    const int ordinal = requests_++;
    if (!behavior_.required_token.empty() &&
        req.get_header_value("Authorization") !=
            "Bearer " + behavior_.required_token) {
      res.status = 401;
      res.set_content(R"({"error":"unauthorized"})", "application/json");
      return;
    }
    if (ordinal < behavior_.fail_first) {
      res.status = behavior_.fail_status;
      res.set_content(R"({"error":"scripted failure"})", "application/json");
      return;
    }
    double delay = behavior_.fixed_delay;
    std::string text;
    try {
      text = reply_text(req.get_header_value(kAttemptHeader), &delay);
    } catch (const Error& e) {
      res.status = 404;
      res.set_content(nlohmann::json{{"error", e.what()}}.dump(),
                      "application/json");
      return;
    }
    if (!sleep_interruptibly(delay)) {
      res.status = 503;
      return;
    }
    res.set_content(envelope(behavior_.api_style, text), "application/json");
  });

  if (port == 0) {
    port_ = server_->bind_to_any_port("127.0.0.1");
  } else if (server_->bind_to_port("127.0.0.1", port)) {
    port_ = port;
  }
  if (port_ <= 0) {
    throw Error(ErrorCode::kTransportError, "mock server could not bind");
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

MockServer::~MockServer() { stop(); }

std::string MockServer::base_url() const {
  return "http://127.0.0.1:" + std::to_string(port_);
}

void MockServer::wait() {
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait(lock, [this] { return stopping_; });
}

void MockServer::stop() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

bool MockServer::sleep_interruptibly(double seconds) {
  if (seconds <= 0) return true;
  std::unique_lock<std::mutex> lock(mu_);
  return !cv_.wait_for(lock, std::chrono::duration<double>(seconds),
                       [this] { return stopping_; });
}

std::string MockServer::reply_text(const std::string& attempt,
                                   double* delay) const {
  // attempt = "thm-017;0.2;3"
  std::string id, lambda_text;
  {
    std::istringstream in(attempt);
    std::getline(in, id, ';');
    std::getline(in, lambda_text, ';');
  }
  SplitMix64 rng(substream_seed(behavior_.seed, attempt, 0));
  switch (behavior_.kind) {
    case MockKind::kCanned:
      return behavior_.canned_reply;
    case MockKind::kOracle: {
      auto by_lambda = oracle_.find(lambda_text);
      if (by_lambda == oracle_.end()) {
        throw Error(ErrorCode::kIndexOutOfRange,
                    "no oracle corpus for lambda '" + lambda_text + "'");
      }
      auto code = by_lambda->second.find(id);
      if (code == by_lambda->second.end()) {
        throw Error(ErrorCode::kIndexOutOfRange, "unknown theorem " + id);
      }
      return nlohmann::json{{"Draft", "Follow the reference argument."},
                            {"Code", code->second}}
          .dump();
    }
    case MockKind::kGarbage: {
      static const char* kWords[] = {
          "perhaps", "the", "axiom", "implies", "we", "consider", "a",
          "successor", "therefore", "by", "symmetry", "it", "follows",
          "clearly", "induction", "on", "nothing", "proof", "omitted"};
      std::string text;
      const int n = 12 + static_cast<int>(rng.below(24));
      for (int i = 0; i < n; ++i) {
        text += (i ? " " : "") +
                std::string(kWords[rng.below(std::size(kWords))]);
      }
      return text + ".";
    }
    case MockKind::kScriptedDelay: {
      const double lambda = lambda_text.empty() ? 0.0 : std::stod(lambda_text);
      const double u1 = 1.0 - rng.uniform();  // (0, 1]
      const double u2 = rng.uniform();
      const double z =
          std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
      *delay += std::max(0.01, behavior_.base_latency +
                                   (lambda > 0 ? behavior_.shift : 0.0) +
                                   behavior_.sigma * z);
      return behavior_.canned_reply;
    }
  }
  return behavior_.canned_reply;
}

}  // namespace onng
