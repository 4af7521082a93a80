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

#include "onng/stats.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

#include "onng/corpus_io.h"
#include "onng/error.h"

namespace onng {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_fraction(double a, double b, double x) {
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 100000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw Error(ErrorCode::kDomainError, "incomplete beta did not converge");
}

// I_x(a, b) given both x and y = 1 - x, so neither loses precision.
double beta_xy(double x, double y, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) -
                                std::lgamma(b) + a * std::log(x) +
                                b * std::log(y));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(a, b, x) / a;
  return 1.0 - front * beta_fraction(b, a, y) / b;
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::size_t utf8_length(const std::string& s) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

bool timed(const Attempt& a, const SummaryOptions& options) {
  return a.responded ||
         (options.include_timeouts && a.error_code == "Timeout");
}

struct Joined {
  const Attempt* attempt;
  bool pass;
};

std::vector<Joined> join(const std::vector<Attempt>& attempts,
                         const std::vector<VerdictRecord>& verdicts,
                         bool require) {
  std::map<std::string, Verdict> by_key;
  for (const auto& v : verdicts) {
    by_key[attempt_key(v.theorem_id, v.lambda, v.trial)] = v.result.verdict;
  }
  std::vector<Joined> out;
  out.reserve(attempts.size());
  for (const auto& a : attempts) {
    auto it = by_key.find(attempt_key(a));
    if (it == by_key.end()) {
      if (!require) {
        out.push_back({&a, false});
        continue;
      }
      throw Error(ErrorCode::kConfigError,
                  "attempt " + attempt_key(a) + " has no verdict");
    }
    out.push_back({&a, it->second == Verdict::kPass});
  }
  return out;
}

}  // namespace

double regularized_beta(double x, double a, double b) {
  if (!(x >= 0.0 && x <= 1.0) || !(a > 0.0) || !(b > 0.0)) {
    throw Error(ErrorCode::kDomainError, "regularized_beta outside its domain");
  }
  return beta_xy(x, 1.0 - x, a, b);
}

double f_upper_tail(double f, double d1, double d2) {
  if (std::isnan(f) || f < 0.0 || !(d1 >= 1.0) || !(d2 >= 1.0) ||
      std::isinf(d1) || std::isinf(d2)) {
    throw Error(ErrorCode::kDomainError, "f_upper_tail outside its domain");
  }
  if (f == 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  const double denom = d2 + d1 * f;
  return std::clamp(beta_xy(d2 / denom, d1 * f / denom, d2 / 2.0, d1 / 2.0),
                    0.0, 1.0);
}

AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) {
    throw Error(ErrorCode::kDegenerateInput, "ANOVA needs at least two groups");
  }
  std::size_t n_total = 0;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].size() < 2) {
      throw Error(ErrorCode::kDegenerateInput,
                  "group " + std::to_string(g) + " has fewer than two points");
    }
    for (double x : groups[g]) {
      if (!std::isfinite(x)) {
        throw Error(ErrorCode::kDegenerateInput, "non-finite observation");
      }
      sum += x;
      sum_sq += x * x;
    }
    n_total += groups[g].size();
  }
  AnovaResult r;
  const double grand = sum / static_cast<double>(n_total);
  for (const auto& g : groups) {
    const double m = mean_of(g);
    r.group_means.push_back(m);
    r.ss_between += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double x : g) r.ss_within += (x - m) * (x - m);
  }
  r.df_between = static_cast<int>(groups.size()) - 1;
  r.df_within = static_cast<int>(n_total - groups.size());
  // Rounding in the means leaves residue of order eps^2 * sum(x^2).
  const double floor = 64.0 * kEps * kEps * sum_sq;
  if (r.ss_within <= floor) {
    if (r.ss_between <= floor) {
      r.f_statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.f_statistic = std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
    }
    return r;
  }
  r.f_statistic = (r.ss_between / r.df_between) / (r.ss_within / r.df_within);
  r.p_value = f_upper_tail(r.f_statistic, r.df_between, r.df_within);
  return r;
}

std::vector<RunSummary> summarize(const std::vector<Attempt>& attempts,
                                  const std::vector<VerdictRecord>& verdicts,
                                  const SummaryOptions& options) {
  struct Cell {
    int correct = 0, total = 0;
    std::vector<double> latencies;
    double draft_chars = 0.0;
  };
  std::map<std::pair<double, int>, Cell> cells;
  for (const Joined& j : join(attempts, verdicts, options.verified)) {
    Cell& c = cells[{j.attempt->lambda, j.attempt->trial}];
    ++c.total;
    if (j.pass) ++c.correct;
    if (timed(*j.attempt, options)) c.latencies.push_back(j.attempt->latency_seconds);
    if (j.attempt->parsed) {
      c.draft_chars += static_cast<double>(utf8_length(j.attempt->parsed->draft));
    }
  }
  for (double lambda : options.expected_lambdas) {
    for (int t = 1; t <= options.expected_trials; ++t) {
      if (!cells.count({lambda, t})) {
        throw Error(ErrorCode::kEmptyGroup,
                    "no attempts for lambda " + format_lambda(lambda) +
                        ", trial " + std::to_string(t));
      }
    }
  }
  if (cells.empty()) throw Error(ErrorCode::kEmptyGroup, "no attempts");
  std::vector<RunSummary> out;
  for (const auto& [key, c] : cells) {
    RunSummary s;
    s.lambda = key.first;
    s.trial = key.second;
    s.correct_count = c.correct;
    s.total = c.total;
    s.correct_rate = static_cast<double>(c.correct) / c.total;
    s.latency_n = static_cast<int>(c.latencies.size());
    s.mean_latency = c.latencies.empty() ? std::nan("") : mean_of(c.latencies);
    s.latency_std = sample_std(c.latencies);
    s.mean_draft_length = c.draft_chars / c.total;
    out.push_back(s);
  }
  return out;
}

std::string_view metric_name(Metric m) {
  return m == Metric::kCorrectRate ? "correct_rate" : "average_time";
}

std::vector<std::vector<double>> anova_groups(
    Metric metric, AnovaUnit unit, const std::vector<Attempt>& attempts,
    const std::vector<VerdictRecord>& verdicts, const SummaryOptions& options) {
  std::map<double, std::vector<double>> by_level;
  if (unit == AnovaUnit::kReplication) {
    for (const RunSummary& s : summarize(attempts, verdicts, options)) {
      auto& g = by_level[s.lambda];
      if (metric == Metric::kCorrectRate) {
        g.push_back(s.correct_rate);
      } else if (s.latency_n > 0) {
        g.push_back(s.mean_latency);
      }
    }
  } else {
    struct Cell {
      int correct = 0, total = 0;
      std::vector<double> latencies;
    };
    std::map<std::pair<double, std::string>, Cell> cells;
    for (const Joined& j : join(attempts, verdicts, options.verified)) {
      Cell& c = cells[{j.attempt->lambda, j.attempt->theorem_id}];
      ++c.total;
      if (j.pass) ++c.correct;
      if (timed(*j.attempt, options)) c.latencies.push_back(j.attempt->latency_seconds);
    }
    for (const auto& [key, c] : cells) {
      auto& g = by_level[key.first];
      if (metric == Metric::kCorrectRate) {
        g.push_back(static_cast<double>(c.correct) / c.total);
      } else if (!c.latencies.empty()) {
        g.push_back(mean_of(c.latencies));
      }
    }
  }
  std::vector<std::vector<double>> out;
  for (auto& [lambda, g] : by_level) out.push_back(std::move(g));
  return out;
}

std::vector<LevelStats> level_stats(const std::vector<RunSummary>& summaries,
                                    Metric metric) {
  std::map<double, std::vector<double>> by_level;
  for (const auto& s : summaries) {
    auto& g = by_level[s.lambda];
    if (metric == Metric::kCorrectRate) {
      g.push_back(s.correct_rate);
    } else if (s.latency_n > 0) {
      g.push_back(s.mean_latency);
    }
  }
  std::vector<LevelStats> out;
  for (const auto& [lambda, g] : by_level) {
    out.push_back({lambda, g.empty() ? std::nan("") : mean_of(g), sample_std(g),
                   static_cast<int>(g.size())});
  }
  return out;
}

std::string format_p(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", p);
  return std::string(buf) + (p < 0.05 ? "*" : "");
}

Analysis analyze(const std::vector<Attempt>& attempts,
                 const std::vector<VerdictRecord>& verdicts,
                 const std::string& model, AnovaUnit unit,
                 const SummaryOptions& options) {
  Analysis a;
  a.model = model;
  a.unit = unit;
  a.include_timeouts = options.include_timeouts;
  a.verified = options.verified;
  a.summaries = summarize(attempts, verdicts, options);
  for (Metric m : {Metric::kCorrectRate, Metric::kAverageTime}) {
    MetricAnalysis ma{m, level_stats(a.summaries, m), std::nullopt, ""};
    if (m == Metric::kCorrectRate && !options.verified) {
      for (auto& l : ma.levels) l.mean = l.std = std::nan("");
      ma.error = "verification skipped";
      a.metrics.push_back(std::move(ma));
      continue;
    }
    try {
      ma.anova = one_way_anova(anova_groups(m, unit, attempts, verdicts, options));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateInput) throw;
      ma.error = e.what();
    }
    a.metrics.push_back(std::move(ma));
  }
  return a;
}

nlohmann::ordered_json analysis_to_json(const Analysis& analysis) {
  auto real = [](double v) -> nlohmann::ordered_json {
    if (std::isfinite(v)) return v;
    return num(v);  // JSON has no inf or nan
  };
  nlohmann::ordered_json j;
  j["model"] = analysis.model;
  j["unit"] = analysis.unit == AnovaUnit::kReplication ? "replication" : "theorem";
  j["include_timeouts"] = analysis.include_timeouts;
  j["verified"] = analysis.verified;
  for (const auto& m : analysis.metrics) {
    nlohmann::ordered_json e;
    e["levels"] = nlohmann::ordered_json::array();
    for (const auto& l : m.levels) {
      e["levels"].push_back(
          {{"lambda", l.lambda}, {"mean", real(l.mean)}, {"std", real(l.std)}, {"n", l.n}});
    }
    if (m.anova) {
      e["f_statistic"] = real(m.anova->f_statistic);
      e["p_value"] = m.anova->p_value;
      e["p_rendered"] = format_p(m.anova->p_value);
      e["df_between"] = m.anova->df_between;
      e["df_within"] = m.anova->df_within;
      e["group_means"] = m.anova->group_means;
    } else {
      e["error"] = m.error;
    }
    j["metrics"][std::string(metric_name(m.metric))] = e;
  }
  return j;
}

void emit_report(const Analysis& analysis, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  // Rates are fractions internally and percentages in every report file.
  auto scale = [](Metric m) { return m == Metric::kCorrectRate ? 100.0 : 1.0; };
  std::string plot = "metric,lambda,mean,std\n";
  std::string pvalues = "model,correct_rate,average_time\n" + analysis.model;
  for (const auto& m : analysis.metrics) {
    std::string csv = "lambda,mean,std,n\n";
    for (const auto& l : m.levels) {
      const double k = scale(m.metric);
      csv += format_lambda(l.lambda) + "," + num(l.mean * k) + "," +
             num(l.std * k) + "," + std::to_string(l.n) + "\n";
      plot += std::string(metric_name(m.metric)) + "," +
              format_lambda(l.lambda) + "," + num(l.mean * k) + "," +
              num(l.std * k) + "\n";
    }
    write_file(dir / (std::string(metric_name(m.metric)) + ".csv"), csv);
    pvalues += "," + (m.anova ? format_p(m.anova->p_value) : std::string("n/a"));
  }
  write_file(dir / "pvalues.csv", pvalues + "\n");
  write_file(dir / "plot_data.csv", plot);
  std::string reps =
      "lambda,trial,correct_count,total,correct_rate,mean_latency,"
      "latency_std,latency_n,mean_draft_length\n";
  for (const auto& s : analysis.summaries) {
    reps += format_lambda(s.lambda) + "," + std::to_string(s.trial) + "," +
            std::to_string(s.correct_count) + "," + std::to_string(s.total) +
            "," + num(s.correct_rate * 100.0) + "," + num(s.mean_latency) + "," +
            num(s.latency_std) + "," + std::to_string(s.latency_n) + "," +
            num(s.mean_draft_length) + "\n";
  }
  write_file(dir / "replications.csv", reps);
  write_file(dir / "anova.json", analysis_to_json(analysis).dump(2) + "\n");
}

}  // namespace onng
