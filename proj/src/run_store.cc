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

#include "onng/run_store.h"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>

#include "onng/corpus_io.h"
#include "onng/error.h"

namespace onng {

namespace fs = std::filesystem;

std::string format_lambda(double lambda) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", lambda);
  return buf;
}

std::string attempt_key(const std::string& theorem_id, double lambda,
                        int trial) {
  return theorem_id + "|" + format_lambda(lambda) + "|" + std::to_string(trial);
}

nlohmann::ordered_json attempt_to_json(const Attempt& a) {
  nlohmann::ordered_json j;
  j["schema_version"] = kAttemptSchemaVersion;
  j["theorem_id"] = a.theorem_id;
  j["lambda"] = a.lambda;
  j["trial"] = a.trial;
  j["prompt_hash"] = a.prompt_hash;
  j["latency_seconds"] = a.latency_seconds;
  j["retries"] = a.retries;
  j["responded"] = a.responded;
  j["timestamp"] = a.timestamp;
  if (a.parsed) {
    j["draft"] = a.parsed->draft;
    j["code"] = a.parsed->code;
    j["draft_missing"] = a.parsed->draft_missing;
  }
  if (!a.ok()) {
    j["error_code"] = a.error_code;
    j["error"] = a.error;
  }
  j["raw_response"] = a.raw_response;
  return j;
}

Attempt attempt_from_json(const nlohmann::json& j) {
  if (j.value("schema_version", 0) != kAttemptSchemaVersion) {
    throw Error(ErrorCode::kIoError, "unsupported attempt schema_version");
  }
  Attempt a;
  a.theorem_id = j.at("theorem_id").get<std::string>();
  a.lambda = j.at("lambda").get<double>();
  a.trial = j.at("trial").get<int>();
  a.prompt_hash = j.value("prompt_hash", "");
  a.latency_seconds = j.value("latency_seconds", 0.0);
  a.retries = j.value("retries", 0);
  a.responded = j.value("responded", false);
  a.timestamp = j.value("timestamp", "");
  a.raw_response = j.value("raw_response", "");
  if (j.contains("code")) {
    ModelResponse r;
    r.draft = j.value("draft", "");
    r.code = j.at("code").get<std::string>();
    r.draft_missing = j.value("draft_missing", false);
    r.raw = a.raw_response;
    a.parsed = std::move(r);
  }
  a.error_code = j.value("error_code", "");
  a.error = j.value("error", "");
  return a;
}

namespace {

// Parses complete lines; returns the byte length of the valid prefix.
std::size_t parse_lines(const std::string& text, const fs::path& path,
                        std::vector<Attempt>* out) {
  std::size_t at = 0;
  std::size_t line_no = 0;
  while (at < text.size()) {
    const std::size_t nl = text.find('\n', at);
    ++line_no;
    const bool last = nl == std::string::npos || nl + 1 == text.size();
    const std::string line =
        text.substr(at, (nl == std::string::npos ? text.size() : nl) - at);
    if (nl == std::string::npos) return at;  // no terminator: torn write
    if (!line.empty()) {
      try {
        out->push_back(attempt_from_json(nlohmann::json::parse(line)));
      } catch (const std::exception& e) {
        if (last) return at;
        throw Error(ErrorCode::kIoError, path.string() + ":" +
                                             std::to_string(line_no) + ": " +
                                             e.what());
      }
    }
    at = nl + 1;
  }
  return at;
}

}  // namespace

std::vector<Attempt> load_attempts(const fs::path& path) {
  std::vector<Attempt> out;
  parse_lines(read_file(path), path, &out);
  return out;
}

RunStore::RunStore(const fs::path& path) : path_(path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::size_t valid = 0;
  if (fs::exists(path)) {
    const std::string text = read_file(path);
    valid = parse_lines(text, path, &existing_);
    if (valid != text.size()) fs::resize_file(path, valid);
  }
  for (const Attempt& a : existing_) keys_.insert(attempt_key(a));
  fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw Error(ErrorCode::kIoError,
                "cannot open " + path.string() + ": " + std::strerror(errno));
  }
}

RunStore::~RunStore() {
  if (fd_ >= 0) ::close(fd_);
}

bool RunStore::has(const std::string& key) const {
  std::lock_guard<std::mutex> lock(mu_);
  return keys_.count(key) > 0;
}

void RunStore::append(const Attempt& a) {
  const std::string line = attempt_to_json(a).dump() + "\n";
  std::lock_guard<std::mutex> lock(mu_);
  std::size_t done = 0;
  while (done < line.size()) {
    const ssize_t n = ::write(fd_, line.data() + done, line.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kIoError,
                  "append to " + path_.string() + ": " + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
  ::fdatasync(fd_);
  keys_.insert(attempt_key(a));
}

}  // namespace onng
