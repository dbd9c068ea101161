#include "testgen/metrics.hpp"

#include "testgen/errors.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace testgen {

double compilation_rate(long n_generated, long n_non_compiling) {
  if (n_generated == 0) {
    throw UndefinedRate("compilation rate over an empty generated set");
  }
  if (n_non_compiling < 0 || n_non_compiling > n_generated) {
    throw InputError("inconsistent counts: non_compiling=" + std::to_string(n_non_compiling) +
                     " generated=" + std::to_string(n_generated));
  }
  return static_cast<double>(n_generated - n_non_compiling) / static_cast<double>(n_generated);
}

double passing_rate(long n_generated, long n_non_compiling, long n_non_passing) {
  if (n_generated == 0) {
    throw UndefinedRate("passing rate over an empty generated set");
  }
  long failing = n_non_compiling + n_non_passing;
  if (n_non_compiling < 0 || n_non_passing < 0 || failing > n_generated) {
    throw InputError("inconsistent counts: non_compiling=" + std::to_string(n_non_compiling) +
                     " non_passing=" + std::to_string(n_non_passing) +
                     " generated=" + std::to_string(n_generated));
  }
  return static_cast<double>(n_generated - failing) / static_cast<double>(n_generated);
}

PooledCounts aggregate(const std::vector<std::pair<long, long>>& covered_total_pairs) {
  if (covered_total_pairs.empty()) {
    throw InputError("aggregate requires at least one snapshot");
  }
  PooledCounts pooled;
  for (const auto& [covered, total] : covered_total_pairs) {
    if (covered < 0 || total < 0 || covered > total) {
      throw InputError("invalid covered/total pair: " + std::to_string(covered) + "/" +
                       std::to_string(total));
    }
    pooled.covered += covered;
    pooled.total += total;
  }
  return pooled;
}

// --- Mann-Whitney U ----------------------------------------------------------

namespace {

// Midranks of the pooled samples, doubled so everything stays integral.
std::vector<long> doubled_midranks(const std::vector<double>& pooled_sorted,
                                   const std::vector<double>& values) {
  std::vector<long> out;
  out.reserve(values.size());
  for (double v : values) {
    auto lo = std::lower_bound(pooled_sorted.begin(), pooled_sorted.end(), v);
    auto hi = std::upper_bound(pooled_sorted.begin(), pooled_sorted.end(), v);
    long first = static_cast<long>(lo - pooled_sorted.begin()) + 1;
    long last = static_cast<long>(hi - pooled_sorted.begin());
    out.push_back(first + last);  // 2 * average rank
  }
  return out;
}

double u_of_first_sample(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled;
  pooled.reserve(a.size() + b.size());
  pooled.insert(pooled.end(), a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::sort(pooled.begin(), pooled.end());
  std::vector<long> ranks2 = doubled_midranks(pooled, a);
  long rank_sum2 = 0;
  for (long r : ranks2) rank_sum2 += r;
  long n_a = static_cast<long>(a.size());
  // U = R_a - n_a(n_a+1)/2, computed on doubled ranks.
  long u2 = rank_sum2 - n_a * (n_a + 1);
  return static_cast<double>(u2) / 2.0;
}

void require_samples(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) {
    throw InputError("Mann-Whitney U requires two non-empty samples");
  }
}

}  // namespace

SignificanceResult mann_whitney_u_exact(const std::vector<double>& a,
                                        const std::vector<double>& b) {
  require_samples(a, b);
  const long n_a = static_cast<long>(a.size());
  const long n_b = static_cast<long>(b.size());
  const long n = n_a + n_b;

  std::vector<double> pooled;
  pooled.reserve(static_cast<std::size_t>(n));
  pooled.insert(pooled.end(), a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::sort(pooled.begin(), pooled.end());
  std::vector<long> ranks2 = doubled_midranks(pooled, pooled);  // per pooled item

  // Distribution of the doubled rank sum over all C(n, n_a) assignments,
  // counted by dynamic programming over the pooled items.
  long max_sum2 = 0;
  for (long r : ranks2) max_sum2 += r;
  // dp[k][s]: number of k-subsets with doubled rank sum s.
  std::vector<std::vector<double>> dp(static_cast<std::size_t>(n_a) + 1,
                                      std::vector<double>(static_cast<std::size_t>(max_sum2) + 1,
                                                          0.0));
  dp[0][0] = 1.0;
  for (long item = 0; item < n; ++item) {
    long r = ranks2[static_cast<std::size_t>(item)];
    for (long k = std::min(item + 1, n_a); k >= 1; --k) {
      auto& row = dp[static_cast<std::size_t>(k)];
      auto& prev = dp[static_cast<std::size_t>(k - 1)];
      for (long s = max_sum2; s >= r; --s) {
        double add = prev[static_cast<std::size_t>(s - r)];
        if (add != 0.0) row[static_cast<std::size_t>(s)] += add;
      }
    }
  }

  // Observed doubled deviation |2U - n_a*n_b|.
  double u = u_of_first_sample(a, b);
  long center2 = n_a * n_b;  // 2 * mean of U
  long dev2_obs = std::lround(std::fabs(2.0 * u - static_cast<double>(center2)));

  double total = 0.0;
  double extreme = 0.0;
  long offset = n_a * (n_a + 1);  // 2U = sum2 - offset
  for (long s = 0; s <= max_sum2; ++s) {
    double count = dp[static_cast<std::size_t>(n_a)][static_cast<std::size_t>(s)];
    if (count == 0.0) continue;
    total += count;
    long dev2 = std::labs((s - offset) - center2);
    if (dev2 >= dev2_obs) extreme += count;
  }

  SignificanceResult result;
  result.u_statistic = u;
  result.p_value = std::min(1.0, extreme / total);
  result.significant = result.p_value < 0.05;
  return result;
}

SignificanceResult mann_whitney_u_approx(const std::vector<double>& a,
                                         const std::vector<double>& b) {
  require_samples(a, b);
  const double n_a = static_cast<double>(a.size());
  const double n_b = static_cast<double>(b.size());
  const double n = n_a + n_b;

  double u = u_of_first_sample(a, b);
  double mean = n_a * n_b / 2.0;

  // Tie correction over pooled value multiplicities.
  std::vector<double> pooled;
  pooled.insert(pooled.end(), a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::sort(pooled.begin(), pooled.end());
  double tie_sum = 0.0;
  for (std::size_t k = 0; k < pooled.size();) {
    std::size_t j = k;
    while (j < pooled.size() && pooled[j] == pooled[k]) ++j;
    double t = static_cast<double>(j - k);
    tie_sum += t * t * t - t;
    k = j;
  }
  double variance = n_a * n_b / 12.0 * ((n + 1.0) - tie_sum / (n * (n - 1.0)));

  SignificanceResult result;
  result.u_statistic = u;
  if (variance <= 0.0) {
    result.p_value = 1.0;
    result.significant = false;
    return result;
  }
  double z = (std::fabs(u - mean) - 0.5) / std::sqrt(variance);
  if (z < 0.0) z = 0.0;
  result.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  result.significant = result.p_value < 0.05;
  return result;
}

SignificanceResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
  require_samples(a, b);
  if (a.size() * b.size() <= 400) {
    return mann_whitney_u_exact(a, b);
  }
  return mann_whitney_u_approx(a, b);
}

// --- reporting --------------------------------------------------------------

namespace {

std::string pct(double ratio) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << ratio * 100.0 << "%";
  return out.str();
}

Json record_to_json(const RunRecord& r) {
  Json j;
  j["project"] = r.project;
  j["mode"] = r.mode;
  j["n_generated"] = r.metrics.n_generated;
  j["n_non_compiling"] = r.metrics.n_non_compiling;
  j["n_non_passing"] = r.metrics.n_non_passing;
  j["compilation_rate"] = r.metrics.compilation_rate;
  j["passing_rate"] = r.metrics.passing_rate;
  j["total_requests"] = r.metrics.total_requests;
  j["line_cov"] = r.metrics.line_cov;
  j["branch_cov"] = r.metrics.branch_cov;
  j["mutation_score"] = r.metrics.mutation_score;
  j["lines"] = Json::array({r.lines_covered, r.lines_total});
  j["branches"] = Json::array({r.branches_covered, r.branches_total});
  j["mutants"] = Json::array({r.mutants_killed, r.mutants_total});
  Json extra;
  extra["additional_classes"] = r.extra.additional_classes;
  extra["additional_interfaces"] = r.extra.additional_interfaces;
  extra["overriding_classes"] = r.extra.overriding_classes;
  extra["empty_placeholder_classes"] = r.extra.empty_placeholder_classes;
  j["extra_content"] = std::move(extra);
  return j;
}

double metric_value(const RunRecord& r, const std::string& metric) {
  if (metric == "line_cov") return r.metrics.line_cov;
  if (metric == "branch_cov") return r.metrics.branch_cov;
  if (metric == "mutation_score") return r.metrics.mutation_score;
  if (metric == "passing_rate") return r.metrics.passing_rate;
  if (metric == "compilation_rate") return r.metrics.compilation_rate;
  return 0.0;
}

}  // namespace

void emit_report(const std::vector<RunRecord>& records, const std::string& out_dir,
                 const std::map<std::string, std::vector<double>>& per_class_samples) {
  if (records.empty()) {
    throw InputError("report requires at least one completed run");
  }
  std::filesystem::create_directories(out_dir);

  std::vector<std::string> modes;
  std::vector<std::string> projects;
  for (const auto& r : records) {
    if (std::find(modes.begin(), modes.end(), r.mode) == modes.end()) modes.push_back(r.mode);
    if (std::find(projects.begin(), projects.end(), r.project) == projects.end()) {
      projects.push_back(r.project);
    }
  }
  std::sort(modes.begin(), modes.end());
  std::sort(projects.begin(), projects.end());

  auto find_record = [&](const std::string& project, const std::string& mode) -> const RunRecord* {
    for (const auto& r : records) {
      if (r.project == project && r.mode == mode) return &r;
    }
    return nullptr;
  };

  const std::vector<std::pair<std::string, std::string>> metrics = {
      {"line_cov", "Line Coverage"},
      {"branch_cov", "Branch Coverage"},
      {"mutation_score", "Mutation Score"},
      {"compilation_rate", "Compilation Rate"},
      {"passing_rate", "Passing Rate"},
  };

  // report.json
  Json doc;
  Json jrecords = Json::array();
  for (const auto& r : records) jrecords.push_back(record_to_json(r));
  doc["records"] = std::move(jrecords);

  Json totals = Json::object();
  for (const auto& mode : modes) {
    std::vector<std::pair<long, long>> lines, branches, mutants;
    long requests = 0, generated = 0, non_compiling = 0, non_passing = 0;
    for (const auto& r : records) {
      if (r.mode != mode) continue;
      lines.push_back({r.lines_covered, r.lines_total});
      branches.push_back({r.branches_covered, r.branches_total});
      mutants.push_back({r.mutants_killed, r.mutants_total});
      requests += r.metrics.total_requests;
      generated += r.metrics.n_generated;
      non_compiling += r.metrics.n_non_compiling;
      non_passing += r.metrics.n_non_passing;
    }
    Json t;
    t["line_cov"] = aggregate(lines).ratio();
    t["branch_cov"] = aggregate(branches).ratio();
    t["mutation_score"] = aggregate(mutants).ratio();
    t["total_requests"] = requests;
    t["n_generated"] = generated;
    if (generated > 0) {
      t["compilation_rate"] = compilation_rate(generated, non_compiling);
      t["passing_rate"] = passing_rate(generated, non_compiling, non_passing);
    }
    totals[mode] = std::move(t);
  }
  doc["totals"] = std::move(totals);

  Json significance = Json::array();
  auto push_entry = [&](const std::string& metric, const std::string& mode_a,
                        const std::string& mode_b, const std::vector<double>& va,
                        const std::vector<double>& vb) {
    if (va.empty() || vb.empty()) return;
    SignificanceResult res = mann_whitney_u(va, vb);
    Json entry;
    entry["metric"] = metric;
    entry["mode_a"] = mode_a;
    entry["mode_b"] = mode_b;
    entry["n_a"] = va.size();
    entry["n_b"] = vb.size();
    entry["u"] = res.u_statistic;
    entry["p_value"] = res.p_value;
    entry["significant"] = res.significant;
    significance.push_back(std::move(entry));
  };
  if (per_class_samples.empty()) {
    for (std::size_t i = 0; i < modes.size(); ++i) {
      for (std::size_t j = i + 1; j < modes.size(); ++j) {
        for (const auto& [metric, label] : metrics) {
          std::vector<double> va, vb;
          for (const auto& p : projects) {
            const RunRecord* ra = find_record(p, modes[i]);
            const RunRecord* rb = find_record(p, modes[j]);
            if (ra != nullptr && rb != nullptr) {
              va.push_back(metric_value(*ra, metric));
              vb.push_back(metric_value(*rb, metric));
            }
          }
          push_entry(metric, modes[i], modes[j], va, vb);
        }
      }
    }
  } else {
    for (std::size_t i = 0; i < modes.size(); ++i) {
      for (std::size_t j = i + 1; j < modes.size(); ++j) {
        auto a = per_class_samples.find(modes[i]);
        auto b = per_class_samples.find(modes[j]);
        if (a == per_class_samples.end() || b == per_class_samples.end()) continue;
        push_entry("passing_rate (per class)", modes[i], modes[j], a->second, b->second);
      }
    }
  }
  doc["significance"] = std::move(significance);
  save_json_file(out_dir + "/report.json", doc);

  // report.md
  std::ostringstream md;
  md << "# Test generation report\n";
  for (const auto& [metric, label] : metrics) {
    md << "\n## " << label << "\n\n| Project |";
    for (const auto& m : modes) md << " " << m << " |";
    md << "\n|---|";
    for (std::size_t k = 0; k < modes.size(); ++k) md << "---|";
    md << "\n";
    for (const auto& p : projects) {
      md << "| " << p << " |";
      for (const auto& m : modes) {
        const RunRecord* r = find_record(p, m);
        md << " " << (r != nullptr ? pct(metric_value(*r, metric)) : "-") << " |";
      }
      md << "\n";
    }
    md << "| **Total** |";
    for (const auto& m : modes) {
      const Json& t = doc["totals"][m];
      if (t.contains(metric)) {
        md << " " << pct(t[metric].get<double>()) << " |";
      } else {
        md << " - |";
      }
    }
    md << "\n";
  }
  md << "\n## Requests\n\n| Project |";
  for (const auto& m : modes) md << " " << m << " |";
  md << "\n|---|";
  for (std::size_t k = 0; k < modes.size(); ++k) md << "---|";
  md << "\n";
  for (const auto& p : projects) {
    md << "| " << p << " |";
    for (const auto& m : modes) {
      const RunRecord* r = find_record(p, m);
      if (r != nullptr) {
        md << " " << r->metrics.total_requests << " |";
      } else {
        md << " - |";
      }
    }
    md << "\n";
  }
  md << "| **Total** |";
  for (const auto& m : modes) {
    md << " " << doc["totals"][m]["total_requests"].get<long>() << " |";
  }
  md << "\n";

  if (!doc["significance"].empty()) {
    md << "\n## Significance (Mann-Whitney U, two-sided)\n\n"
       << "| Metric | Modes | n | U | p | significant (p < 0.05) |\n|---|---|---|---|---|---|\n";
    for (const auto& e : doc["significance"]) {
      md << "| " << e["metric"].get<std::string>() << " | " << e["mode_a"].get<std::string>()
         << " vs " << e["mode_b"].get<std::string>() << " | " << e["n_a"].get<long>() << "/"
         << e["n_b"].get<long>() << " | " << e["u"].get<double>() << " | " << std::fixed
         << std::setprecision(4) << e["p_value"].get<double>() << " | "
         << (e["significant"].get<bool>() ? "yes" : "no") << " |\n";
    }
  }
  write_text_file(out_dir + "/report.md", md.str());

  // report.csv: one row per project x mode x metric.
  std::ostringstream csv;
  csv << "project,mode,metric,value\n";
  for (const auto& r : records) {
    for (const auto& [metric, label] : metrics) {
      csv << r.project << "," << r.mode << "," << metric << "," << std::setprecision(10)
          << metric_value(r, metric) << "\n";
    }
    csv << r.project << "," << r.mode << ",total_requests," << r.metrics.total_requests << "\n";
    csv << r.project << "," << r.mode << ",n_generated," << r.metrics.n_generated << "\n";
  }
  write_text_file(out_dir + "/report.csv", csv.str());
}

}  // namespace testgen
