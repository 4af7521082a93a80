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

#include "onng/pipeline.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>
#include <toml.hpp>

#include "onng/corpus_io.h"
#include "onng/error.h"
#include "onng/hash.h"
#include "onng/obfuscate.h"
#include "onng/promptgen.h"
#include "onng/run_store.h"
#include "onng/unicode.h"

namespace onng {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

[[noreturn]] void config_error(const std::string& msg) {
  throw Error(ErrorCode::kConfigError, msg);
}

nlohmann::json toml_to_json(const toml::node& node) {
  if (auto t = node.as_table()) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : *t) j[std::string(k.str())] = toml_to_json(v);
    return j;
  }
  if (auto a = node.as_array()) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& v : *a) j.push_back(toml_to_json(v));
    return j;
  }
  if (auto v = node.as_string()) return v->get();
  if (auto v = node.as_integer()) return v->get();
  if (auto v = node.as_floating_point()) return v->get();
  if (auto v = node.as_boolean()) return v->get();
  config_error("unsupported TOML value type");
}

void check_keys(const nlohmann::json& table, const std::string& where,
                std::initializer_list<std::string_view> allowed) {
  for (const auto& [k, v] : table.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      config_error("unknown key `" + k + "` in " + where);
    }
  }
}

template <typename T>
void read(const nlohmann::json& table, const char* key, T* out) {
  if (!table.contains(key)) return;
  try {
    *out = table.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    config_error(std::string("config key `") + key + "` has the wrong type");
  }
}

void read_path(const nlohmann::json& table, const char* key,
               const fs::path& base, fs::path* out) {
  std::string s;
  read(table, key, &s);
  if (!s.empty()) *out = (base / s).lexically_normal();
}

// Sorted file hashes below dir, keyed by relative path.
ojson hash_tree(const fs::path& dir, const std::string& skip = "") {
  std::vector<fs::path> files;
  if (fs::exists(dir)) {
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
      if (e.is_regular_file() && e.path().filename() != skip) {
        files.push_back(e.path());
      }
    }
  }
  std::sort(files.begin(), files.end());
  ojson out = ojson::object();
  for (const auto& f : files) {
    out[fs::relative(f, dir).generic_string()] = sha256_file(f);
  }
  return out;
}

constexpr const char* kManifest = "manifest.json";

bool up_to_date(const fs::path& dir, const ojson& inputs, const ojson& params) {
  const fs::path path = dir / kManifest;
  if (!fs::exists(path)) return false;
  ojson m;
  try {
    m = ojson::parse(read_file(path));
  } catch (const nlohmann::json::exception&) {
    return false;
  }
  if (m.value("inputs", ojson()) != inputs || m.value("params", ojson()) != params) {
    return false;
  }
  return m.value("outputs", ojson()) == hash_tree(dir, kManifest);
}

// A manifest for other inputs or params means the stage's artifacts are
// stale; without one, a partial stage (e.g. an interrupted bench) resumes.
void prepare(const fs::path& dir) {
  const fs::path path = dir / kManifest;
  if (fs::exists(path)) {
    spdlog::info("discarding stale artifacts in {}", dir.string());
    fs::remove_all(dir);
  }
  fs::create_directories(dir);
}

void finish(const fs::path& dir, Stage stage, const ojson& inputs,
            const ojson& params, const ojson& tools) {
  ojson m;
  m["stage"] = stage_name(stage);
  m["inputs"] = inputs;
  m["params"] = params;
  m["tools"] = tools;
  m["outputs"] = hash_tree(dir, kManifest);
  write_file(dir / kManifest, m.dump(2) + "\n");
}

std::string pool_text(const std::vector<char32_t>& pool) {
  std::string s;
  for (char32_t c : pool) s += encode_utf8(c);
  return s;
}

std::vector<char32_t> pool_for(const RunConfig& c) {
  return c.char_pool.empty() ? default_char_pool() : load_char_pool(c.char_pool);
}

Toolchain toolchain_for(const RunConfig& c) {
  Toolchain tc = c.toolchain;
  if (tc.version.empty()) tc.version = load_corpus_dir(c.corpus_dir).toolchain;
  return tc;
}

ojson endpoint_params(const ModelEndpoint& e) {
  ojson j;
  j["base_url"] = e.base_url;
  j["path"] = e.path;
  j["api_style"] = e.api_style;
  j["model_id"] = e.model_id;
  j["request_timeout"] = e.request_timeout;
  j["max_retries"] = e.max_retries;
  j["sampling"] = e.sampling;
  return j;
}

ojson lambda_list(const RunConfig& c) {
  ojson j = ojson::array();
  for (double l : c.lambda_levels) j.push_back(format_lambda(l));
  return j;
}

ojson obfuscated_hashes(const RunLayout& layout, const RunConfig& c) {
  ojson j;
  for (double l : c.lambda_levels) {
    j[format_lambda(l)] = sha256_file(layout.obfuscated_dir(l) / "corpus.json");
  }
  return j;
}

ojson base_tools() { return ojson{{"onng", kToolVersion}}; }

bool do_parse(const RunConfig& c, const RunLayout& layout, bool force) {
  const fs::path dir = layout.stage_dir(Stage::kParse);
  const ojson inputs = {{"corpus_dir", hash_tree(c.corpus_dir)}};
  const ojson params = ojson::object();
  if (!force && up_to_date(dir, inputs, params)) return false;
  prepare(dir);
  const Corpus corpus = load_corpus_dir(c.corpus_dir);
  write_file(layout.corpus_json(), corpus_to_json(corpus).dump(2) + "\n");
  finish(dir, Stage::kParse, inputs, params, base_tools());
  return true;
}

bool do_obfuscate(const RunConfig& c, const RunLayout& layout, bool force) {
  const fs::path dir = layout.stage_dir(Stage::kObfuscate);
  const auto pool = pool_for(c);
  const ojson inputs = {{"corpus", sha256_file(layout.corpus_json())},
                        {"char_pool", sha256_hex(pool_text(pool))}};
  ObfuscationParams p;
  p.char_pool = pool;
  p.seed = c.seed;
  const ojson params = {{"lambda_levels", lambda_list(c)},
                        {"seed", c.seed},
                        {"exponent", p.exponent},
                        {"insertion_ratio", p.insertion_ratio},
                        {"deletion_ratio", p.deletion_ratio}};
  if (!force && up_to_date(dir, inputs, params)) return false;
  prepare(dir);
  const Corpus corpus = load_corpus(layout.corpus_json());
  for (double l : c.lambda_levels) {
    p.lambda = l;
    const RenameMap map = build_rename_map(corpus, p);
    const Corpus renamed = apply_rename(corpus, map);
    const fs::path out = layout.obfuscated_dir(l);
    write_corpus_dir(renamed, out / "corpus");
    write_file(out / "corpus.json", corpus_to_json(renamed).dump(2) + "\n");
    write_file(out / "rename_map.json", rename_map_to_json(map).dump(2) + "\n");
  }
  finish(dir, Stage::kObfuscate, inputs, params, base_tools());
  return true;
}

bool do_queries(const RunConfig& c, const RunLayout& layout, bool force) {
  const fs::path dir = layout.stage_dir(Stage::kQueries);
  const ojson inputs = {{"corpora", obfuscated_hashes(layout, c)},
                        {"template", sha256_file(c.prompt_template)}};
  const ojson params = {{"lambda_levels", lambda_list(c)}};
  if (!force && up_to_date(dir, inputs, params)) return false;
  prepare(dir);
  const std::string tmpl = read_file(c.prompt_template);
  std::string out;
  for (const auto& [l, corpus] : load_obfuscated(layout, c.lambda_levels)) {
    const std::size_t n = corpus.theorem_positions().size();
    for (std::size_t k = 0; k < n; ++k) {
      const Query q = build_query(corpus, k, tmpl);
      ojson j;
      j["theorem_id"] = q.theorem_id;
      j["lambda"] = l;
      j["declaration_index"] = q.declaration_index;
      j["prompt_hash"] = sha256_hex(q.system_preamble + "\n" + q.rendered);
      j["system"] = q.system_preamble;
      j["user"] = q.rendered;
      out += j.dump() + "\n";
    }
  }
  write_file(layout.queries(), out);
  write_file(dir / "template.txt", tmpl);
  finish(dir, Stage::kQueries, inputs, params, base_tools());
  return true;
}

bool do_bench(const RunConfig& c, const RunLayout& layout, bool force,
              const ProgressFn& progress) {
  const fs::path dir = layout.stage_dir(Stage::kBench);
  const ojson inputs = {{"queries", sha256_file(layout.queries())}};
  const ojson params = {{"model_name", c.model_name},
                        {"endpoint", endpoint_params(c.endpoint)},
                        {"lambda_levels", lambda_list(c)},
                        {"trials", c.trials}};
  if (!force && up_to_date(dir, inputs, params)) return false;
  if (force) fs::remove_all(dir);
  prepare(dir);
  BenchmarkPlan plan;
  plan.lambda_levels = c.lambda_levels;
  plan.trials_per_cell = c.trials;
  plan.concurrency_limit = c.bench_concurrency;
  plan.endpoint = c.endpoint;
  RunStore store(layout.attempts());
  if (!store.existing().empty()) {
    spdlog::info("resuming with {} recorded attempts", store.existing().size());
  }
  run_benchmark(plan, load_obfuscated(layout, c.lambda_levels),
                read_file(c.prompt_template), store, progress);
  finish(dir, Stage::kBench, inputs, params, base_tools());
  return true;
}

bool do_verify(const RunConfig& c, const RunLayout& layout, bool force) {
  const fs::path dir = layout.stage_dir(Stage::kVerify);
  const Toolchain tc = toolchain_for(c);
  const ojson inputs = {{"attempts", sha256_file(layout.attempts())},
                        {"corpora", obfuscated_hashes(layout, c)}};
  const ojson params = {{"toolchain", tc.version},
                        {"timeout", c.verify_timeout}};
  if (!force && up_to_date(dir, inputs, params)) return false;
  prepare(dir);
  VerifyOptions opts;
  opts.toolchain = tc;
  opts.timeout_seconds = c.verify_timeout;
  opts.concurrency = c.verify_concurrency;
  const auto verdicts = verify_attempts(
      load_attempts(layout.attempts()), load_obfuscated(layout, c.lambda_levels),
      opts);
  save_verdicts(verdicts, layout.verdicts());
  ojson tools = base_tools();
  // Recorded only when something was compiled.
  try {
    tools["lean"] = ensure_toolchain(tc);
  } catch (const Error&) {
    tools["lean"] = nullptr;
  }
  finish(dir, Stage::kVerify, inputs, params, tools);
  return true;
}

bool do_analyze(const RunConfig& c, const RunLayout& layout, bool force,
                std::optional<Analysis>* result) {
  const fs::path dir = layout.report_dir();
  const bool verified = !c.skip_verify;
  ojson inputs = {{"attempts", sha256_file(layout.attempts())}};
  if (verified) inputs["verdicts"] = sha256_file(layout.verdicts());
  const ojson params = {
      {"model_name", c.model_name},
      {"unit", c.unit == AnovaUnit::kReplication ? "replication" : "theorem"},
      {"include_timeouts", c.include_timeouts},
      {"verified", verified},
      {"lambda_levels", lambda_list(c)},
      {"trials", c.trials}};
  SummaryOptions opts;
  opts.include_timeouts = c.include_timeouts;
  opts.expected_lambdas = c.lambda_levels;
  opts.expected_trials = c.trials;
  opts.verified = verified;
  const auto attempts = load_attempts(layout.attempts());
  const auto verdicts =
      verified ? load_verdicts(layout.verdicts()) : std::vector<VerdictRecord>{};
  *result = analyze(attempts, verdicts, c.model_name, c.unit, opts);
  if (!force && up_to_date(dir, inputs, params)) return false;
  prepare(dir);
  emit_report(**result, dir);
  finish(dir, Stage::kAnalyze, inputs, params, base_tools());
  return true;
}

}  // namespace

void RunConfig::validate() const {
  if (corpus_dir.empty() || !fs::is_directory(corpus_dir)) {
    config_error("corpus_dir `" + corpus_dir.string() + "` is not a directory");
  }
  if (!fs::is_regular_file(corpus_dir / "corpus.toml")) {
    config_error("corpus_dir has no corpus.toml");
  }
  if (output_dir.empty()) config_error("output_dir is required");
  if (!fs::is_regular_file(prompt_template)) {
    config_error("prompt_template `" + prompt_template.string() + "` not found");
  }
  if (!char_pool.empty() && !fs::is_regular_file(char_pool)) {
    config_error("char_pool `" + char_pool.string() + "` not found");
  }
  if (lambda_levels.empty()) config_error("lambda_levels is empty");
  for (std::size_t i = 0; i < lambda_levels.size(); ++i) {
    if (!(lambda_levels[i] >= 0.0 && lambda_levels[i] <= 1.0)) {
      config_error("lambda levels must lie in [0, 1]");
    }
    if (i > 0 && !(lambda_levels[i] > lambda_levels[i - 1])) {
      config_error("lambda_levels must be sorted ascending and unique");
    }
  }
  if (trials < 1) config_error("trials must be at least 1");
  if (model_name.empty()) config_error("model_name is required");
  if (!(verify_timeout > 0)) config_error("verify timeout must be positive");
  if (verify_concurrency < 0) config_error("verify concurrency must be >= 0");
  BenchmarkPlan plan;
  plan.lambda_levels = lambda_levels;
  plan.trials_per_cell = trials;
  plan.concurrency_limit = bench_concurrency;
  plan.endpoint = endpoint;
  plan.validate();
}

RunConfig load_run_config(const fs::path& path) {
  nlohmann::json doc;
  try {
    doc = toml_to_json(toml::parse_file(path.string()));
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << path.string() << ": " << e.description() << " at " << e.source().begin;
    config_error(msg.str());
  } catch (const std::exception& e) {
    config_error(path.string() + ": " + e.what());
  }
  const fs::path base = path.parent_path();
  check_keys(doc, "the top level",
             {"corpus_dir", "output_dir", "prompt_template", "char_pool",
              "lambda_levels", "seed", "trials", "model_name", "endpoint",
              "toolchain", "verify", "analysis"});
  RunConfig c;
  read_path(doc, "corpus_dir", base, &c.corpus_dir);
  read_path(doc, "output_dir", base, &c.output_dir);
  read_path(doc, "prompt_template", base, &c.prompt_template);
  read_path(doc, "char_pool", base, &c.char_pool);
  read(doc, "lambda_levels", &c.lambda_levels);
  std::int64_t seed = static_cast<std::int64_t>(c.seed);
  read(doc, "seed", &seed);
  if (seed < 0) config_error("seed must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  read(doc, "trials", &c.trials);
  read(doc, "model_name", &c.model_name);

  const nlohmann::json ep = doc.value("endpoint", nlohmann::json::object());
  check_keys(ep, "[endpoint]",
             {"base_url", "path", "api_style", "model_id", "auth_token_env",
              "auth_header", "auth_prefix", "headers", "request_timeout",
              "connect_timeout", "max_retries", "retry_backoff", "concurrency",
              "sampling"});
  ModelEndpoint& e = c.endpoint;
  read(ep, "base_url", &e.base_url);
  read(ep, "path", &e.path);
  read(ep, "api_style", &e.api_style);
  read(ep, "model_id", &e.model_id);
  read(ep, "auth_token_env", &e.auth_token_env);
  read(ep, "auth_header", &e.auth_header);
  read(ep, "auth_prefix", &e.auth_prefix);
  read(ep, "headers", &e.extra_headers);
  read(ep, "request_timeout", &e.request_timeout);
  read(ep, "connect_timeout", &e.connect_timeout);
  read(ep, "max_retries", &e.max_retries);
  read(ep, "retry_backoff", &e.retry_backoff);
  read(ep, "concurrency", &c.bench_concurrency);
  if (ep.contains("sampling")) e.sampling = ep["sampling"];

  const nlohmann::json tc = doc.value("toolchain", nlohmann::json::object());
  check_keys(tc, "[toolchain]", {"lean", "version", "allow_version_mismatch"});
  read(tc, "lean", &c.toolchain.lean);
  read(tc, "version", &c.toolchain.version);
  read(tc, "allow_version_mismatch", &c.toolchain.allow_version_mismatch);

  const nlohmann::json v = doc.value("verify", nlohmann::json::object());
  check_keys(v, "[verify]", {"timeout", "concurrency", "skip"});
  read(v, "timeout", &c.verify_timeout);
  read(v, "concurrency", &c.verify_concurrency);
  read(v, "skip", &c.skip_verify);

  const nlohmann::json a = doc.value("analysis", nlohmann::json::object());
  check_keys(a, "[analysis]", {"unit", "include_timeouts"});
  std::string unit = "replication";
  read(a, "unit", &unit);
  if (unit == "replication") {
    c.unit = AnovaUnit::kReplication;
  } else if (unit == "theorem") {
    c.unit = AnovaUnit::kTheorem;
  } else {
    config_error("analysis.unit must be \"replication\" or \"theorem\"");
  }
  read(a, "include_timeouts", &c.include_timeouts);
  return c;
}

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::kParse: return "parse";
    case Stage::kObfuscate: return "obfuscate";
    case Stage::kQueries: return "gen-queries";
    case Stage::kBench: return "bench";
    case Stage::kVerify: return "verify";
    case Stage::kAnalyze: return "analyze";
  }
  return "";
}

fs::path RunLayout::stage_dir(Stage s) const {
  switch (s) {
    case Stage::kParse: return root / "parse";
    case Stage::kObfuscate: return root / "obfuscate";
    case Stage::kQueries: return root / "queries";
    case Stage::kBench: return root / "bench";
    case Stage::kVerify: return root / "verify";
    case Stage::kAnalyze: return root / "report";
  }
  return root;
}
fs::path RunLayout::corpus_json() const { return stage_dir(Stage::kParse) / "corpus.json"; }
fs::path RunLayout::obfuscated_dir(double lambda) const {
  return stage_dir(Stage::kObfuscate) / ("lambda-" + format_lambda(lambda));
}
fs::path RunLayout::queries() const { return stage_dir(Stage::kQueries) / "queries.jsonl"; }
fs::path RunLayout::attempts() const { return stage_dir(Stage::kBench) / "attempts.jsonl"; }
fs::path RunLayout::verdicts() const { return stage_dir(Stage::kVerify) / "verdicts.jsonl"; }
fs::path RunLayout::report_dir() const { return stage_dir(Stage::kAnalyze); }

std::map<double, Corpus> load_obfuscated(const RunLayout& layout,
                                         const std::vector<double>& lambdas) {
  std::map<double, Corpus> out;
  for (double l : lambdas) {
    out.emplace(l, load_corpus(layout.obfuscated_dir(l) / "corpus.json"));
  }
  return out;
}

std::string remediation_hint(ErrorCode code) {
  switch (code) {
    case ErrorCode::kToolchainMissing:
      return "install the pinned Lean toolchain with elan, set [toolchain] "
             "lean, or rerun with --skip-verify for a dry run";
    case ErrorCode::kAuthFailure:
      return "export the token named by endpoint.auth_token_env";
    case ErrorCode::kConfigError:
      return "fix the configuration file or flags";
    case ErrorCode::kIoError:
      return "check the output directory; delete the stage directory to "
             "regenerate it";
    case ErrorCode::kCollisionExhaustion:
      return "use a larger char_pool";
    case ErrorCode::kUnresolvedReference:
    case ErrorCode::kCyclicDependency:
    case ErrorCode::kMalformedDeclaration:
      return "fix the corpus sources";
    default:
      return "";
  }
}

bool run_stage(Stage stage, const RunConfig& config,
               const PipelineOptions& options) {
  std::optional<Analysis> ignored;
  const RunLayout layout(config.output_dir);
  auto emit = [&](const char* status, const std::string& detail = "") {
    if (options.on_stage) options.on_stage({stage, status, detail});
  };
  emit("start");
  bool ran = false;
  try {
    switch (stage) {
      case Stage::kParse: ran = do_parse(config, layout, options.force); break;
      case Stage::kObfuscate: ran = do_obfuscate(config, layout, options.force); break;
      case Stage::kQueries: ran = do_queries(config, layout, options.force); break;
      case Stage::kBench:
        ran = do_bench(config, layout, options.force, options.on_progress);
        break;
      case Stage::kVerify: ran = do_verify(config, layout, options.force); break;
      case Stage::kAnalyze:
        ran = do_analyze(config, layout, options.force, &ignored);
        break;
    }
  } catch (const Error& e) {
    std::string msg = "stage `" + std::string(stage_name(stage)) + "`: " + e.message();
    const std::string hint = remediation_hint(e.code());
    if (!hint.empty()) msg += " (hint: " + hint + ")";
    throw Error(e.code(), msg);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kIoError,
                "stage `" + std::string(stage_name(stage)) + "`: " + e.what());
  }
  emit(ran ? "done" : "skipped", ran ? "" : "up to date");
  return ran;
}

PipelineResult run_pipeline(const RunConfig& config,
                            const PipelineOptions& options) {
  config.validate();
  PipelineResult result;
  if (!config.skip_verify) {
    // Fail before any model request is spent.
    try {
      ensure_toolchain(toolchain_for(config));
    } catch (const Error& e) {
      throw Error(e.code(), "stage `verify`: " + e.message() +
                                " (hint: " + remediation_hint(e.code()) + ")");
    }
  }
  for (Stage s : {Stage::kParse, Stage::kObfuscate, Stage::kQueries,
                  Stage::kBench, Stage::kVerify}) {
    if (s == Stage::kVerify && config.skip_verify) {
      if (options.on_stage) options.on_stage({s, "skipped", "--skip-verify"});
      result.ran[s] = false;
      continue;
    }
    result.ran[s] = run_stage(s, config, options);
  }
  const RunLayout layout(config.output_dir);
  if (options.on_stage) options.on_stage({Stage::kAnalyze, "start", ""});
  bool ran = false;
  try {
    ran = do_analyze(config, layout, options.force, &result.analysis);
  } catch (const Error& e) {
    throw Error(e.code(), "stage `analyze`: " + e.message());
  }
  result.ran[Stage::kAnalyze] = ran;
  if (options.on_stage) {
    options.on_stage({Stage::kAnalyze, ran ? "done" : "skipped", ran ? "" : "up to date"});
  }
  return result;
}

}  // namespace onng
