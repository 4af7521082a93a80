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

#ifndef ONNG_RUN_STORE_H_
#define ONNG_RUN_STORE_H_

#include <filesystem>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "onng/promptgen.h"

namespace onng {

inline constexpr int kAttemptSchemaVersion = 1;

struct Attempt {
  std::string theorem_id;
  double lambda = 0.0;
  int trial = 1;
  std::string prompt_hash;
  std::string raw_response;
  std::optional<ModelResponse> parsed;
  double latency_seconds = 0.0;
  int retries = 0;
  // A reply arrived (even if it failed to parse); only these are timed.
  bool responded = false;
  // Error code name (e.g. "Timeout") and message for failed attempts.
  std::string error_code;
  std::string error;
  std::string timestamp;

  bool ok() const { return error_code.empty(); }
};

// Canonical text for a noise level, used in keys and file names.
std::string format_lambda(double lambda);
// "thm-001|0.2|3"
std::string attempt_key(const std::string& theorem_id, double lambda,
                        int trial);
inline std::string attempt_key(const Attempt& a) {
  return attempt_key(a.theorem_id, a.lambda, a.trial);
}

nlohmann::ordered_json attempt_to_json(const Attempt& a);
Attempt attempt_from_json(const nlohmann::json& j);

// Reads a JSONL attempt file. A truncated final line (a crash mid-write)
// is ignored; a bad line anywhere else is an IoError.
std::vector<Attempt> load_attempts(const std::filesystem::path& path);

// Append-only JSONL store; one self-delimiting line per attempt.
class RunStore {
 public:
  // Opens or creates `path`, trimming a truncated tail left by a crash.
  explicit RunStore(const std::filesystem::path& path);
  ~RunStore();
  RunStore(const RunStore&) = delete;
  RunStore& operator=(const RunStore&) = delete;

  const std::vector<Attempt>& existing() const { return existing_; }
  bool has(const std::string& key) const;
  // Thread-safe; the record is on disk when this returns.
  void append(const Attempt& a);

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  mutable std::mutex mu_;
  std::vector<Attempt> existing_;
  std::set<std::string> keys_;
};

}  // namespace onng

#endif  // ONNG_RUN_STORE_H_
