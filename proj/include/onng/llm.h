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

#ifndef ONNG_LLM_H_
#define ONNG_LLM_H_

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "onng/corpus.h"
#include "onng/promptgen.h"
#include "onng/run_store.h"

namespace onng {

// Request header naming the grid cell; test doubles key replies on it.
inline constexpr const char* kAttemptHeader = "X-Onng-Attempt";

struct ModelEndpoint {
  // Scheme, host and optional port, e.g. "https://api.example.com".
  std::string base_url;
  std::string path = "/v1/chat/completions";
  // "chat-completions" (choices[0].message.content) or "messages"
  // (system as a top-level field, reply in content[].text).
  std::string api_style = "chat-completions";
  std::string model_id;
  // Environment variable holding the token; empty disables auth.
  std::string auth_token_env;
  std::string auth_header = "Authorization";
  std::string auth_prefix = "Bearer ";
  std::map<std::string, std::string> extra_headers;
  double request_timeout = 300.0;
  double connect_timeout = 10.0;
  int max_retries = 3;
  double retry_backoff = 1.0;
  // Merged into the request body (temperature, max_tokens, ...).
  nlohmann::json sampling = nlohmann::json::object();

  void validate() const;
};

struct QueryResult {
  std::string raw_text;
  // Successful exchange only; failed tries are not timed.
  double latency_seconds = 0.0;
  int retries = 0;
};

// Raises Timeout, AuthFailure, RateLimited, TransportError or
// MalformedResponse (reply body not in the expected envelope).
QueryResult query_model(const ModelEndpoint& endpoint, const Query& query,
                        const std::string& attempt_header = "");

struct BenchmarkPlan {
  std::vector<double> lambda_levels = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  int trials_per_cell = 5;
  int concurrency_limit = 8;
  ModelEndpoint endpoint;

  void validate() const;
};

using ProgressFn = std::function<void(const Attempt&, std::size_t done,
                                      std::size_t total)>;

// Runs every missing (theorem, lambda, trial) cell and returns the new
// attempts. Per-attempt failures are recorded, not raised.
std::vector<Attempt> run_benchmark(const BenchmarkPlan& plan,
                                   const std::map<double, Corpus>& corpora,
                                   const std::string& template_text,
                                   RunStore& store,
                                   const ProgressFn& progress = nullptr);

// ISO 8601 UTC with milliseconds.
std::string utc_timestamp();

}  // namespace onng

#endif  // ONNG_LLM_H_
