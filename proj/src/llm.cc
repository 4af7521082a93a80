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

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <mutex>
#include <thread>

#include "onng/error.h"
#include "onng/hash.h"

namespace onng {

namespace {

using Clock = std::chrono::steady_clock;

void set_timeout(double seconds,
                 const std::function<void(time_t, time_t)>& setter) {
  const auto whole = static_cast<time_t>(seconds);
  setter(whole, static_cast<time_t>((seconds - whole) * 1e6));
}

std::string extract_text(const std::string& style, const std::string& body) {
  const nlohmann::json doc =
      nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    throw Error(ErrorCode::kMalformedResponse, "reply body is not JSON");
  }
  try {
    if (style == "messages") {
      std::string text;
      for (const auto& block : doc.at("content")) {
        if (block.value("type", "text") == "text") {
          text += block.at("text").get<std::string>();
        }
      }
      return text;
    }
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedResponse,
                std::string("unexpected reply envelope: ") + e.what());
  }
}

std::string request_body(const ModelEndpoint& ep, const Query& q) {
  nlohmann::json body = ep.sampling;
  body["model"] = ep.model_id;
  if (ep.api_style == "messages") {
    body["system"] = q.system_preamble;
    body["messages"] = {{{"role", "user"}, {"content", q.rendered}}};
    if (!body.contains("max_tokens")) body["max_tokens"] = 4096;
  } else {
    body["messages"] = nlohmann::json::array();
    if (!q.system_preamble.empty()) {
      body["messages"].push_back(
          {{"role", "system"}, {"content", q.system_preamble}});
    }
    body["messages"].push_back({{"role", "user"}, {"content", q.rendered}});
  }
  return body.dump();
}

}  // namespace

void ModelEndpoint::validate() const {
  if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0) {
    throw Error(ErrorCode::kConfigError,
                "endpoint base_url must start with http:// or https://");
  }
  if (api_style != "chat-completions" && api_style != "messages") {
    throw Error(ErrorCode::kConfigError, "unknown api_style " + api_style);
  }
  if (!(request_timeout > 0) || !(connect_timeout > 0)) {
    throw Error(ErrorCode::kConfigError, "endpoint timeouts must be positive");
  }
  if (max_retries < 0) {
    throw Error(ErrorCode::kConfigError, "max_retries must be >= 0");
  }
}

void BenchmarkPlan::validate() const {
  endpoint.validate();
  if (lambda_levels.empty()) {
    throw Error(ErrorCode::kConfigError, "no lambda levels");
  }
  for (double l : lambda_levels) {
    if (!(l >= 0.0 && l <= 1.0)) {
      throw Error(ErrorCode::kConfigError,
                  "lambda " + format_lambda(l) + " outside [0, 1]");
    }
  }
  if (trials_per_cell < 1) {
    throw Error(ErrorCode::kConfigError, "trials_per_cell must be >= 1");
  }
  if (concurrency_limit < 1) {
    throw Error(ErrorCode::kConfigError, "concurrency_limit must be >= 1");
  }
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      now.time_since_epoch())
                      .count() %
                  1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

QueryResult query_model(const ModelEndpoint& ep, const Query& q,
                        const std::string& attempt_header) {
  ep.validate();
  httplib::Headers headers;
  if (!ep.auth_token_env.empty()) {
    const char* token = std::getenv(ep.auth_token_env.c_str());
    if (token == nullptr || *token == '\0') {
      throw Error(ErrorCode::kAuthFailure,
                  "environment variable " + ep.auth_token_env + " is not set");
    }
    headers.emplace(ep.auth_header, ep.auth_prefix + token);
  }
  for (const auto& [k, v] : ep.extra_headers) headers.emplace(k, v);
  if (!attempt_header.empty()) headers.emplace(kAttemptHeader, attempt_header);
  const std::string body = request_body(ep, q);

  std::string last_failure;
  bool rate_limited = false;
  for (int attempt = 0; attempt <= ep.max_retries; ++attempt) {
    httplib::Client cli(ep.base_url);
    set_timeout(ep.connect_timeout,
                [&](time_t s, time_t us) { cli.set_connection_timeout(s, us); });
    set_timeout(ep.request_timeout,
                [&](time_t s, time_t us) { cli.set_read_timeout(s, us); });
    set_timeout(ep.request_timeout,
                [&](time_t s, time_t us) { cli.set_write_timeout(s, us); });

    const auto start = Clock::now();
    const auto res = cli.Post(ep.path, headers, body, "application/json");
    const double elapsed =
        std::chrono::duration<double>(Clock::now() - start).count();

    double wait = ep.retry_backoff * std::pow(2.0, attempt);
    if (!res) {
      const auto err = res.error();
      if (err == httplib::Error::Read &&
          elapsed >= 0.95 * ep.request_timeout) {
        throw Error(ErrorCode::kTimeout,
                    "no reply within " + format_lambda(ep.request_timeout) +
                        " s");
      }
      last_failure = httplib::to_string(err);
      rate_limited = false;
    } else if (res->status >= 200 && res->status < 300) {
      return {extract_text(ep.api_style, res->body), elapsed, attempt};
    } else if (res->status == 401 || res->status == 403) {
      throw Error(ErrorCode::kAuthFailure,
                  "HTTP " + std::to_string(res->status));
    } else if (res->status == 429 || res->status >= 500) {
      rate_limited = res->status == 429;
      last_failure = "HTTP " + std::to_string(res->status);
      if (res->has_header("Retry-After")) {
        wait = std::atof(res->get_header_value("Retry-After").c_str());
      }
    } else {
      throw Error(ErrorCode::kTransportError,
                  "HTTP " + std::to_string(res->status) + ": " +
                      res->body.substr(0, 200));
    }
    if (attempt < ep.max_retries) {
      std::this_thread::sleep_for(
          std::chrono::duration<double>(std::min(wait, 60.0)));
    }
  }
  throw Error(rate_limited ? ErrorCode::kRateLimited : ErrorCode::kTransportError,
              last_failure + " after " + std::to_string(ep.max_retries + 1) +
                  " tries");
}

std::vector<Attempt> run_benchmark(const BenchmarkPlan& plan,
                                   const std::map<double, Corpus>& corpora,
                                   const std::string& template_text,
                                   RunStore& store,
                                   const ProgressFn& progress) {
  plan.validate();
  const ModelEndpoint& ep = plan.endpoint;
  if (!ep.auth_token_env.empty() && std::getenv(ep.auth_token_env.c_str()) == nullptr) {
    throw Error(ErrorCode::kConfigError,
                "environment variable " + ep.auth_token_env + " is not set");
  }

  struct Cell {
    const Query* query;
    std::string hash;
    double lambda;
  };
  struct Task {
    const Cell* cell;
    int trial;
  };
  std::vector<std::unique_ptr<Query>> queries;
  std::vector<std::unique_ptr<Cell>> cells;
  std::vector<Task> tasks;
  for (double lambda : plan.lambda_levels) {
    auto it = corpora.find(lambda);
    if (it == corpora.end()) {
      throw Error(ErrorCode::kConfigError,
                  "no corpus for lambda " + format_lambda(lambda));
    }
    const Corpus& corpus = it->second;
    for (std::size_t k = 0; k < corpus.theorem_count(); ++k) {
      queries.push_back(
          std::make_unique<Query>(build_query(corpus, k, template_text)));
      const Query& q = *queries.back();
      cells.push_back(std::make_unique<Cell>(
          Cell{&q, sha256_hex(q.system_preamble + "\n" + q.rendered), lambda}));
      for (int t = 1; t <= plan.trials_per_cell; ++t) {
        if (!store.has(attempt_key(q.theorem_id, lambda, t))) {
          tasks.push_back({cells.back().get(), t});
        }
      }
    }
  }

  std::vector<Attempt> results;
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;

  const auto run_one = [&](const Task& task) {
    const Query& q = *task.cell->query;
    Attempt a;
    a.theorem_id = q.theorem_id;
    a.lambda = task.cell->lambda;
    a.trial = task.trial;
    a.prompt_hash = task.cell->hash;
    a.timestamp = utc_timestamp();
    const std::string header = q.theorem_id + ";" + format_lambda(a.lambda) +
                               ";" + std::to_string(a.trial);
    const auto start = Clock::now();
    try {
      QueryResult r = query_model(ep, q, header);
      a.responded = true;
      a.raw_response = std::move(r.raw_text);
      a.latency_seconds = r.latency_seconds;
      a.retries = r.retries;
      a.parsed = parse_response(a.raw_response);
    } catch (const Error& e) {
      a.error_code = std::string(error_code_name(e.code()));
      a.error = e.message();
      if (e.code() == ErrorCode::kTimeout) {
        a.latency_seconds =
            std::chrono::duration<double>(Clock::now() - start).count();
      }
    }
    store.append(a);
    std::lock_guard<std::mutex> lock(mu);
    results.push_back(a);
    if (progress) progress(a, results.size(), tasks.size());
  };
  const auto worker = [&] {
    try {
      for (std::size_t i = next++; i < tasks.size(); i = next++) {
        run_one(tasks[i]);
      }
    } catch (...) {
      // A store failure ends the run; records already written stay valid.
      std::lock_guard<std::mutex> lock(mu);
      if (!fatal) fatal = std::current_exception();
      next = tasks.size();
    }
  };

  const std::size_t n_workers = std::min<std::size_t>(
      static_cast<std::size_t>(plan.concurrency_limit), tasks.size());
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < n_workers; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (fatal) std::rethrow_exception(fatal);
  return results;
}

}  // namespace onng
