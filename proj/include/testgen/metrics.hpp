#pragma once

#include "testgen/jsonio.hpp"
#include "testgen/sanitizer.hpp"

#include <map>
#include <string>
#include <vector>

namespace testgen {

struct SuiteMetrics {
  long n_generated = 0;
  long n_non_compiling = 0;
  long n_non_passing = 0;
  double compilation_rate = 0.0;  // in [0,1]
  double passing_rate = 0.0;      // in [0,1]
  long total_requests = 0;
  double line_cov = 0.0;
  double branch_cov = 0.0;
  double mutation_score = 0.0;
};

// (n_generated - n_non_compiling) / n_generated. Throws UndefinedRate when
// n_generated is zero and InputError on inconsistent counts.
double compilation_rate(long n_generated, long n_non_compiling);

// (n_generated - (n_non_compiling + n_non_passing)) / n_generated.
double passing_rate(long n_generated, long n_non_compiling, long n_non_passing);

// Pooled totals: sums of covered and total counts, then one division —
// never a mean of per-project percentages.
struct PooledCounts {
  long covered = 0;
  long total = 0;
  double ratio() const { return total == 0 ? 0.0 : static_cast<double>(covered) / total; }
};
PooledCounts aggregate(const std::vector<std::pair<long, long>>& covered_total_pairs);

struct SignificanceResult {
  double u_statistic = 0.0;  // U of the first sample, midrank ties
  double p_value = 1.0;      // two-sided
  bool significant = false;  // p < 0.05
};

// Two-sided Mann-Whitney U. Exact null distribution (all rank assignments,
// midrank ties) when n_a*n_b <= 400; normal approximation with tie correction
// and continuity correction otherwise. Throws InputError on empty samples.
SignificanceResult mann_whitney_u(const std::vector<double>& sample_a,
                                  const std::vector<double>& sample_b);
SignificanceResult mann_whitney_u_exact(const std::vector<double>& sample_a,
                                        const std::vector<double>& sample_b);
SignificanceResult mann_whitney_u_approx(const std::vector<double>& sample_a,
                                         const std::vector<double>& sample_b);

// --- reporting --------------------------------------------------------------

struct RunRecord {
  std::string project;
  std::string mode;
  SuiteMetrics metrics;
  ExtraContentStats extra;
  // Raw coverage counts for pooled totals.
  long lines_covered = 0, lines_total = 0;
  long branches_covered = 0, branches_total = 0;
  long mutants_killed = 0, mutants_total = 0;
};

// Writes report.json, report.md and report.csv under out_dir: per-mode
// tables, pooled totals, and pairwise Mann-Whitney U tests. Significance is
// computed over per-project metric values by default; when per_class_samples
// is non-empty (mode -> per-unit passing rates) those observations are used
// instead.
void emit_report(const std::vector<RunRecord>& records, const std::string& out_dir,
                 const std::map<std::string, std::vector<double>>& per_class_samples = {});

}  // namespace testgen
