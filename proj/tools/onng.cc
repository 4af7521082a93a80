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

// Command-line driver for the obfuscated benchmark pipeline.

#include <signal.h>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <mutex>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "onng/corpus_io.h"
#include "onng/error.h"
#include "onng/mock_server.h"
#include "onng/obfuscate.h"
#include "onng/pipeline.h"
#include "onng/promptgen.h"
#include "onng/run_store.h"
#include "onng/stats.h"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitStageFailure = 1;
constexpr int kExitConfig = 2;

bool g_porcelain = false;
std::mutex g_out_mu;

void porcelain(const ordered_json& j) {
  if (!g_porcelain) return;
  std::lock_guard<std::mutex> lock(g_out_mu);
  std::cout << j.dump() << std::endl;
}

// Flags that override configuration fields when given.
struct Overrides {
  std::string output_dir, base_url, model_name, lean, unit;
  std::vector<double> lambda_levels;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials, concurrency, verify_concurrency;
  std::optional<double> verify_timeout;
  bool skip_verify = false, allow_mismatch = false, include_timeouts = false;

  void add_to(CLI::App* app) {
    app->add_option("--output-dir", output_dir, "Artifact root");
    app->add_option("--base-url", base_url, "Model endpoint base URL");
    app->add_option("--model-name", model_name, "Label used in reports");
    app->add_option("--lean", lean, "Lean executable");
    app->add_option("--unit", unit, "ANOVA unit: replication or theorem")
        ->check(CLI::IsMember({"replication", "theorem"}));
    app->add_option("--lambda-levels", lambda_levels, "Noise levels");
    app->add_option("--seed", seed, "Obfuscation seed");
    app->add_option("--trials", trials, "Trials per (theorem, lambda)");
    app->add_option("--concurrency", concurrency, "Outstanding requests");
    app->add_option("--verify-concurrency", verify_concurrency,
                    "Parallel compiler processes (0 = CPU count)");
    app->add_option("--verify-timeout", verify_timeout, "Seconds per compile");
    app->add_flag("--skip-verify", skip_verify, "Dry run without Lean");
    app->add_flag("--allow-toolchain-mismatch", allow_mismatch,
                  "Accept a Lean version other than the pinned one");
    app->add_flag("--include-timeouts", include_timeouts,
                  "Count timed-out requests in Average Time");
  }

  void apply(onng::RunConfig* c) const {
    if (!output_dir.empty()) c->output_dir = output_dir;
    if (!base_url.empty()) c->endpoint.base_url = base_url;
    if (!model_name.empty()) c->model_name = model_name;
    if (!lean.empty()) c->toolchain.lean = lean;
    if (!unit.empty()) {
      c->unit = unit == "theorem" ? onng::AnovaUnit::kTheorem
                                  : onng::AnovaUnit::kReplication;
    }
    if (!lambda_levels.empty()) c->lambda_levels = lambda_levels;
    if (seed) c->seed = *seed;
    if (trials) c->trials = *trials;
    if (concurrency) c->bench_concurrency = *concurrency;
    if (verify_concurrency) c->verify_concurrency = *verify_concurrency;
    if (verify_timeout) c->verify_timeout = *verify_timeout;
    if (skip_verify) c->skip_verify = true;
    if (allow_mismatch) c->toolchain.allow_version_mismatch = true;
    if (include_timeouts) c->include_timeouts = true;
  }
};

onng::RunConfig load_config(const std::string& path, const Overrides& o) {
  onng::RunConfig c = onng::load_run_config(path);
  o.apply(&c);
  c.validate();
  return c;
}

onng::PipelineOptions pipeline_options(bool force) {
  onng::PipelineOptions opts;
  opts.force = force;
  opts.on_stage = [](const onng::StageEvent& e) {
    const std::string name(onng::stage_name(e.stage));
    if (e.status != "start") {
      spdlog::info("{}: {}{}", name, e.status,
                   e.detail.empty() ? "" : " (" + e.detail + ")");
    }
    porcelain({{"event", "stage"}, {"stage", name}, {"status", e.status},
               {"detail", e.detail}});
  };
  opts.on_progress = [](const onng::Attempt& a, std::size_t done,
                        std::size_t total) {
    porcelain({{"event", "attempt"}, {"theorem_id", a.theorem_id},
               {"lambda", a.lambda}, {"trial", a.trial},
               {"ok", a.ok()}, {"done", done}, {"total", total}});
    if (!a.ok()) {
      spdlog::debug("{} failed: {}: {}", onng::attempt_key(a), a.error_code, a.error);
    }
    const std::size_t step = std::max<std::size_t>(1, total / 20);
    if (done % step == 0 || done == total) {
      spdlog::info("bench: {}/{} attempts", done, total);
    }
  };
  return opts;
}

void print_analysis(const onng::Analysis& a, const fs::path& report) {
  ordered_json p;
  for (const auto& m : a.metrics) {
    const std::string name(onng::metric_name(m.metric));
    p[name] = m.anova ? ordered_json(onng::format_p(m.anova->p_value))
                      : ordered_json(nullptr);
    if (!g_porcelain) {
      std::cout << name << ": p = "
                << (m.anova ? onng::format_p(m.anova->p_value) : "n/a ("+ m.error + ")")
                << "\n";
      for (const auto& l : m.levels) {
        const double k = m.metric == onng::Metric::kCorrectRate ? 100.0 : 1.0;
        std::printf("  lambda %-4s mean %10.4f  std %10.4f  n %d\n",
                    onng::format_lambda(l.lambda).c_str(), l.mean * k,
                    l.std * k, l.n);
      }
    }
  }
  if (!g_porcelain) std::cout << "report: " << report.string() << "\n";
  porcelain({{"event", "result"}, {"report", report.string()}, {"p_values", p}});
}

int cmd_parse(const std::string& dir, const std::string& out) {
  const onng::Corpus corpus = onng::load_corpus_dir(dir);
  const std::string text = onng::corpus_to_json(corpus).dump(2) + "\n";
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    onng::write_file(out, text);
    spdlog::info("{} declarations, {} theorems -> {}", corpus.declarations.size(),
                 corpus.theorem_positions().size(), out);
  }
  return kExitOk;
}

int cmd_obfuscate(const std::string& input, double lambda, std::uint64_t seed,
                  const std::string& emit, const std::string& pool) {
  const onng::Corpus corpus = onng::load_corpus(input);
  onng::ObfuscationParams p;
  p.lambda = lambda;
  p.seed = seed;
  if (!pool.empty()) p.char_pool = onng::load_char_pool(pool);
  const onng::RenameMap map = onng::build_rename_map(corpus, p);
  const onng::Corpus renamed = onng::apply_rename(corpus, map);
  const fs::path dir = emit;
  onng::write_corpus_dir(renamed, dir / "corpus");
  onng::write_file(dir / "corpus.json", onng::corpus_to_json(renamed).dump(2) + "\n");
  onng::write_file(dir / "rename_map.json",
                   onng::rename_map_to_json(map).dump(2) + "\n");
  ordered_json manifest = {{"stage", "obfuscate"},
                           {"lambda", lambda},
                           {"seed", seed},
                           {"exponent", p.exponent},
                           {"insertion_ratio", p.insertion_ratio},
                           {"deletion_ratio", p.deletion_ratio},
                           {"input", input},
                           {"onng", onng::kToolVersion}};
  onng::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  spdlog::info("renamed {} identifiers -> {}", map.entries.size(), emit);
  return kExitOk;
}

int cmd_gen_queries(const std::string& input, const std::string& tmpl_path,
                    const std::string& out) {
  const onng::Corpus corpus = onng::load_corpus(input);
  const std::string tmpl = onng::read_file(tmpl_path);
  std::string text;
  const std::size_t n = corpus.theorem_positions().size();
  for (std::size_t k = 0; k < n; ++k) {
    const onng::Query q = onng::build_query(corpus, k, tmpl);
    text += ordered_json{{"theorem_id", q.theorem_id},
                         {"declaration_index", q.declaration_index},
                         {"system", q.system_preamble},
                         {"user", q.rendered}}
                .dump() + "\n";
  }
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    onng::write_file(out, text);
  }
  return kExitOk;
}

int cmd_analyze(const std::string& verdicts_path, std::string attempts_path,
                const std::string& out, const std::string& model,
                const std::string& unit, bool include_timeouts) {
  if (attempts_path.empty()) {
    const fs::path dir = fs::path(verdicts_path).parent_path();
    for (const fs::path& p : {dir / "attempts.jsonl", dir / ".." / "bench" / "attempts.jsonl"}) {
      if (fs::exists(p)) {
        attempts_path = p.string();
        break;
      }
    }
    if (attempts_path.empty()) {
      throw onng::Error(onng::ErrorCode::kConfigError,
                        "no attempts.jsonl next to the verdicts; pass --attempts");
    }
  }
  onng::SummaryOptions opts;
  opts.include_timeouts = include_timeouts;
  const auto analysis = onng::analyze(
      onng::load_attempts(attempts_path), onng::load_verdicts(verdicts_path),
      model, unit == "theorem" ? onng::AnovaUnit::kTheorem
                               : onng::AnovaUnit::kReplication,
      opts);
  onng::emit_report(analysis, out);
  print_analysis(analysis, out);
  return kExitOk;
}

int cmd_mock_serve(const std::string& kind, int port, const std::string& config,
                   const Overrides& o, double shift, double sigma,
                   const std::string& token) {
  onng::MockBehavior b;
  if (kind == "oracle") b.kind = onng::MockKind::kOracle;
  else if (kind == "garbage") b.kind = onng::MockKind::kGarbage;
  else if (kind == "delay") b.kind = onng::MockKind::kScriptedDelay;
  else b.kind = onng::MockKind::kCanned;
  b.shift = shift;
  b.sigma = sigma;
  b.required_token = token;
  std::map<double, onng::Corpus> corpora;
  if (b.kind == onng::MockKind::kOracle) {
    if (config.empty()) {
      throw onng::Error(onng::ErrorCode::kConfigError,
                        "the oracle mock needs --config of a run whose "
                        "obfuscate stage has completed");
    }
    const onng::RunConfig c = load_config(config, o);
    corpora = onng::load_obfuscated(onng::RunLayout(c.output_dir), c.lambda_levels);
  }
  // Block the signals before the server threads start so they inherit it.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  onng::MockServer server(b, std::move(corpora), port);
  if (g_porcelain) {
    porcelain({{"event", "listening"}, {"base_url", server.base_url()}});
  } else {
    std::cout << "listening on " << server.base_url() << std::endl;
  }
  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  spdlog::info("served {} requests", server.requests());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("onng");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("%H:%M:%S %^%l%$ %v");

  CLI::App app{"Obfuscated theorem-proving benchmark pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  bool verbose = false, quiet = false;
  app.add_flag("--porcelain", g_porcelain,
               "Machine-readable JSON lines on standard output");
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Warnings and errors only");

  std::string path, out, tmpl, pool, config, attempts, model = "model", unit = "replication";
  double lambda = 0.0, shift = 2.0, sigma = 0.2;
  std::uint64_t seed = 42;
  int port = 8765;
  bool force = false, resume = false, include_timeouts = false;
  std::string kind = "canned", token;
  Overrides ov;

  auto* parse = app.add_subcommand("parse", "Parse a corpus directory to JSON");
  parse->add_option("corpus_dir", path, "Directory with corpus.toml")->required();
  parse->add_option("-o,--out", out, "Output file (default: stdout)");

  auto* obf = app.add_subcommand("obfuscate", "Rename a corpus at one noise level");
  obf->add_option("corpus", path, "Corpus directory or JSON")->required();
  obf->add_option("--lambda", lambda, "Noise level in [0, 1]")->required();
  obf->add_option("--seed", seed, "Seed");
  obf->add_option("--emit", out, "Output directory")->required();
  obf->add_option("--char-pool", pool, "Character pool file");

  auto* gq = app.add_subcommand("gen-queries", "Render one prompt per theorem");
  gq->add_option("corpus", path, "Corpus directory or JSON")->required();
  gq->add_option("--template", tmpl, "Prompt template")->required();
  gq->add_option("-o,--out", out, "Output JSONL (default: stdout)");

  auto* bench = app.add_subcommand("bench", "Query the model over the grid");
  bench->add_option("--plan,--config", config, "Run configuration (TOML)")->required();
  bench->add_flag("--resume", resume, "Continue an interrupted run");
  ov.add_to(bench);

  auto* verify = app.add_subcommand("verify", "Compile and classify the attempts");
  verify->add_option("--config", config, "Run configuration (TOML)")->required();
  verify->add_flag("--force", force, "Ignore the stage manifest");
  ov.add_to(verify);

  auto* an = app.add_subcommand("analyze", "Summaries, ANOVA and report files");
  an->add_option("verdicts", path, "verdicts.jsonl")->required();
  an->add_option("--attempts", attempts, "attempts.jsonl (default: beside verdicts or ../bench)");
  an->add_option("--out", out, "Report directory")->required();
  an->add_option("--model", model, "Model label");
  an->add_option("--unit", unit, "replication or theorem")
      ->check(CLI::IsMember({"replication", "theorem"}));
  an->add_flag("--include-timeouts", include_timeouts, "Count timeouts in Average Time");

  auto* run = app.add_subcommand("run", "Run every stage");
  run->add_option("--config", config, "Run configuration (TOML)")->required();
  run->add_flag("--force", force, "Ignore stage manifests");
  ov.add_to(run);

  auto* mock = app.add_subcommand("mock-serve", "Serve a local mock model");
  mock->add_option("--kind", kind, "canned, oracle, garbage or delay")
      ->check(CLI::IsMember({"canned", "oracle", "garbage", "delay"}));
  mock->add_option("--port", port, "Port (0 picks one)");
  mock->add_option("--config", config, "Run whose obfuscated corpora the oracle replays");
  mock->add_option("--shift", shift, "Added latency at lambda > 0 (delay kind)");
  mock->add_option("--sigma", sigma, "Latency noise (delay kind)");
  mock->add_option("--token", token, "Require this bearer token");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  spdlog::set_level(verbose ? spdlog::level::debug
                    : quiet ? spdlog::level::warn
                            : spdlog::level::info);

  try {
    if (*parse) return cmd_parse(path, out);
    if (*obf) return cmd_obfuscate(path, lambda, seed, out, pool);
    if (*gq) return cmd_gen_queries(path, tmpl, out);
    if (*an) return cmd_analyze(path, attempts, out, model, unit, include_timeouts);
    if (*mock) return cmd_mock_serve(kind, port, config, ov, shift, sigma, token);
    const onng::RunConfig c = load_config(config, ov);
    if (*bench) {
      const onng::RunLayout layout(c.output_dir);
      if (!resume && fs::exists(layout.attempts()) &&
          !fs::exists(layout.stage_dir(onng::Stage::kBench) / "manifest.json")) {
        throw onng::Error(onng::ErrorCode::kConfigError,
                          "an interrupted run exists in " + c.output_dir.string() +
                              "; pass --resume to continue it");
      }
      const auto opts = pipeline_options(false);
      for (auto s : {onng::Stage::kParse, onng::Stage::kObfuscate,
                     onng::Stage::kQueries, onng::Stage::kBench}) {
        onng::run_stage(s, c, opts);
      }
      return kExitOk;
    }
    if (*verify) {
      onng::run_stage(onng::Stage::kVerify, c, pipeline_options(force));
      return kExitOk;
    }
    const auto result = onng::run_pipeline(c, pipeline_options(force));
    print_analysis(*result.analysis, onng::RunLayout(c.output_dir).report_dir());
    return kExitOk;
  } catch (const onng::Error& e) {
    spdlog::error("{}", e.what());
    porcelain({{"event", "error"}, {"code", onng::error_code_name(e.code())},
               {"message", e.message()}});
    return e.code() == onng::ErrorCode::kConfigError ? kExitConfig
                                                     : kExitStageFailure;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitStageFailure;
  }
}
