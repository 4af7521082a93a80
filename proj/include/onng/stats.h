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

#ifndef ONNG_STATS_H_
#define ONNG_STATS_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "onng/run_store.h"
#include "onng/verify.h"

namespace onng {

// One replication (trial index) at one noise level.
struct RunSummary {
  double lambda = 0.0;
  int trial = 1;
  int correct_count = 0;
  int total = 0;
  double correct_rate = 0.0;
  // Latency over timed attempts; NaN when latency_n is zero.
  double mean_latency = 0.0;
  double latency_std = 0.0;
  int latency_n = 0;
  // Mean character length of the returned draft (stored, not analysed).
  double mean_draft_length = 0.0;
};

struct SummaryOptions {
  // Timed-out requests enter Average Time at their elapsed latency.
  bool include_timeouts = false;
  // When non-empty, every (lambda, trial) cell must be present.
  std::vector<double> expected_lambdas;
  int expected_trials = 0;
  // False for runs without verification: attempts need no verdict and
  // Correct Rate is reported as unavailable.
  bool verified = true;
};

// Joins attempts to verdicts by (theorem, lambda, trial) and groups by
// (lambda, trial). Sorted by lambda then trial.
std::vector<RunSummary> summarize(const std::vector<Attempt>& attempts,
                                  const std::vector<VerdictRecord>& verdicts,
                                  const SummaryOptions& options = {});

struct AnovaResult {
  // +infinity when the within-group variance vanishes.
  double f_statistic = 0.0;
  double p_value = 1.0;
  int df_between = 0;
  int df_within = 0;
  std::vector<double> group_means;
  double ss_between = 0.0;
  double ss_within = 0.0;
};

// Survival function of F(d1, d2) at f.
double f_upper_tail(double f, double d1, double d2);

// Regularized incomplete beta I_x(a, b).
double regularized_beta(double x, double a, double b);

AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups);

enum class Metric { kCorrectRate, kAverageTime };
std::string_view metric_name(Metric m);  // "correct_rate", "average_time"

// Observation unit for the significance test.
enum class AnovaUnit {
  kReplication,  // one value per (lambda, trial)
  kTheorem,      // one value per (lambda, theorem), pooled over trials
};

// Groups in ascending lambda order.
std::vector<std::vector<double>> anova_groups(
    Metric metric, AnovaUnit unit, const std::vector<Attempt>& attempts,
    const std::vector<VerdictRecord>& verdicts,
    const SummaryOptions& options = {});

// Per-lambda mean and sample std over replications.
struct LevelStats {
  double lambda = 0.0;
  double mean = 0.0;
  double std = 0.0;
  int n = 0;
};
std::vector<LevelStats> level_stats(const std::vector<RunSummary>& summaries,
                                    Metric metric);

// "0.0242*" below 0.05, "0.1573" otherwise.
std::string format_p(double p);

struct MetricAnalysis {
  Metric metric;
  std::vector<LevelStats> levels;
  // Unset when the test could not be run (see error).
  std::optional<AnovaResult> anova;
  std::string error;
};

struct Analysis {
  std::string model;
  AnovaUnit unit = AnovaUnit::kReplication;
  bool include_timeouts = false;
  bool verified = true;
  std::vector<RunSummary> summaries;
  std::vector<MetricAnalysis> metrics;
};

Analysis analyze(const std::vector<Attempt>& attempts,
                 const std::vector<VerdictRecord>& verdicts,
                 const std::string& model, AnovaUnit unit,
                 const SummaryOptions& options = {});

// Writes correct_rate.csv, average_time.csv, pvalues.csv, plot_data.csv,
// replications.csv and anova.json into dir.
void emit_report(const Analysis& analysis, const std::filesystem::path& dir);

nlohmann::ordered_json analysis_to_json(const Analysis& analysis);

}  // namespace onng

#endif  // ONNG_STATS_H_
