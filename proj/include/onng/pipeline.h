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

#ifndef ONNG_PIPELINE_H_
#define ONNG_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "onng/error.h"
#include "onng/llm.h"
#include "onng/stats.h"
#include "onng/verify.h"

namespace onng {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct RunConfig {
  std::filesystem::path corpus_dir;
  std::filesystem::path output_dir;
  std::filesystem::path prompt_template;
  // Empty selects the built-in pool.
  std::filesystem::path char_pool;
  std::vector<double> lambda_levels = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::uint64_t seed = 42;
  int trials = 5;
  std::string model_name = "model";
  ModelEndpoint endpoint;
  int bench_concurrency = 8;
  // An empty version pins the corpus toolchain.
  Toolchain toolchain{"lean", "", false};
  bool skip_verify = false;
  double verify_timeout = kDefaultCompileTimeout;
  int verify_concurrency = 0;
  AnovaUnit unit = AnovaUnit::kReplication;
  bool include_timeouts = false;

  // Raises ConfigError.
  void validate() const;
};

// Relative paths resolve against the config file's directory.
RunConfig load_run_config(const std::filesystem::path& path);

enum class Stage { kParse, kObfuscate, kQueries, kBench, kVerify, kAnalyze };
std::string_view stage_name(Stage s);  // "parse", ..., "analyze"

struct StageEvent {
  Stage stage;
  std::string status;  // "start", "done", "skipped"
  std::string detail;
};

struct PipelineOptions {
  // Ignore manifests and rerun every stage.
  bool force = false;
  std::function<void(const StageEvent&)> on_stage;
  ProgressFn on_progress;
};

// Artifact locations under output_dir.
struct RunLayout {
  explicit RunLayout(std::filesystem::path root) : root(std::move(root)) {}
  std::filesystem::path root;
  std::filesystem::path stage_dir(Stage s) const;
  std::filesystem::path corpus_json() const;
  std::filesystem::path obfuscated_dir(double lambda) const;
  std::filesystem::path queries() const;
  std::filesystem::path attempts() const;
  std::filesystem::path verdicts() const;
  std::filesystem::path report_dir() const;
};

// Obfuscated corpora written by the obfuscate stage, keyed by lambda.
std::map<double, Corpus> load_obfuscated(const RunLayout& layout,
                                         const std::vector<double>& lambdas);

struct PipelineResult {
  std::map<Stage, bool> ran;  // false when skipped as up to date
  std::optional<Analysis> analysis;
};

// Runs one stage; false when its manifest shows it is up to date.
// Failures are rethrown with the stage name and a remediation hint.
bool run_stage(Stage stage, const RunConfig& config,
               const PipelineOptions& options = {});

PipelineResult run_pipeline(const RunConfig& config,
                            const PipelineOptions& options = {});

// Remediation advice for an error code, empty when none applies.
std::string remediation_hint(ErrorCode code);

}  // namespace onng

#endif  // ONNG_PIPELINE_H_
