// Copyright 2026 The rlsum Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rlsum/analysis.hpp"

#include <climits>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "rlsum/errors.hpp"
#include "rlsum/rng.hpp"
#include "rlsum/text_metrics.hpp"

namespace rlsum {

namespace {

std::string format4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

void PairedScores::validate() const {
  if (system_a.size() != system_b.size()) {
    throw std::invalid_argument("PairedScores: length mismatch (" +
                                std::to_string(system_a.size()) + " vs " +
                                std::to_string(system_b.size()) + ")");
  }
  if (system_a.size() < 2) {
    throw std::invalid_argument("PairedScores: need at least 2 paired examples");
  }
  for (const auto* side : {&system_a, &system_b}) {
    for (double v : *side) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument("PairedScores: score " + std::to_string(v) +
                                    " outside [0, 1]");
      }
    }
  }
}

BootstrapResult bootstrap_test(const PairedScores& scores, int resamples, double alpha,
                               std::uint64_t seed) {
  scores.validate();
  if (resamples < 1000) {
    throw std::invalid_argument("bootstrap_test: resamples must be >= 1000");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("bootstrap_test: alpha must lie in (0, 1)");
  }

  const std::size_t n = scores.system_a.size();
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = scores.system_a[i] - scores.system_b[i];

  Rng rng(seed);
  long long not_better = 0;
  for (int r = 0; r < resamples; ++r) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += diff[rng.uniform_int(static_cast<std::uint64_t>(n))];
    }
    // mean(a*) <= mean(b*) is equivalent to the resampled diff sum <= 0.
    if (sum <= 0.0) ++not_better;
  }
  BootstrapResult result;
  result.p_value = static_cast<double>(not_better) / static_cast<double>(resamples);
  result.significant = result.p_value < alpha;
  return result;
}

NoveltyReport novelty_profile(
    const std::vector<TokenSeq>& sources,
    const std::vector<std::pair<std::string, std::vector<TokenSeq>>>& summaries_per_system,
    const std::vector<int>& n_values) {
  if (sources.empty()) throw std::invalid_argument("novelty_profile: no sources");
  if (n_values.empty()) throw std::invalid_argument("novelty_profile: no n values");
  if (summaries_per_system.empty()) throw std::invalid_argument("novelty_profile: no systems");
  for (const auto& [name, summaries] : summaries_per_system) {
    if (summaries.size() != sources.size()) {
      throw std::invalid_argument("novelty_profile: system '" + name + "' has " +
                                  std::to_string(summaries.size()) + " summaries for " +
                                  std::to_string(sources.size()) + " sources");
    }
  }

  NoveltyReport report;
  report.n_values = n_values;
  for (const auto& [name, summaries] : summaries_per_system) {
    std::vector<double> means;
    means.reserve(n_values.size());
    for (int n : n_values) {
      double total = 0.0;
      for (std::size_t i = 0; i < sources.size(); ++i) {
        total += ngram_novelty(sources[i], summaries[i], n);
      }
      means.push_back(total / static_cast<double>(sources.size()));
    }
    report.systems.push_back(name);
    report.mean_novelty.push_back(std::move(means));
  }
  return report;
}

std::vector<LengthBucketRow> length_bucket_rouge(const std::vector<Example>& examples,
                                                 const std::vector<TokenSeq>& summaries,
                                                 const std::vector<int>& bucket_edges) {
  if (examples.size() != summaries.size()) {
    throw std::invalid_argument("length_bucket_rouge: " + std::to_string(examples.size()) +
                                " examples vs " + std::to_string(summaries.size()) +
                                " summaries");
  }
  if (bucket_edges.empty()) {
    throw std::invalid_argument("length_bucket_rouge: no bucket edges");
  }
  for (std::size_t i = 0; i + 1 < bucket_edges.size(); ++i) {
    if (bucket_edges[i] >= bucket_edges[i + 1]) {
      throw std::invalid_argument("length_bucket_rouge: edges must be strictly increasing");
    }
  }

  std::vector<LengthBucketRow> rows;
  int lo = 0;
  for (int edge : bucket_edges) {
    rows.push_back({lo, edge, 0, std::nullopt});
    lo = edge;
  }
  rows.push_back({lo, INT_MAX, 0, std::nullopt});

  std::vector<double> sums(rows.size(), 0.0);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const int len = examples[i].summary.size();
    std::size_t b = 0;
    while (b + 1 < rows.size() && len >= rows[b].hi) ++b;
    rows[b].count += 1;
    sums[b] += rouge_l_f1(examples[i].summary, summaries[i]).f1;
  }
  for (std::size_t b = 0; b < rows.size(); ++b) {
    if (rows[b].count > 0) {
      rows[b].mean_rouge_l = sums[b] / static_cast<double>(rows[b].count);
    }
  }
  return rows;
}

void emit_report(const ReportTable& table, const std::string& path, const std::string& format) {
  for (const auto& [name, cells] : table.rows) {
    if (cells.size() != table.columns.size()) {
      throw std::invalid_argument("emit_report: row '" + name + "' has " +
                                  std::to_string(cells.size()) + " cells for " +
                                  std::to_string(table.columns.size()) + " columns");
    }
  }

  if (format == "csv") {
    std::ofstream out(path);
    if (!out) throw IoError("emit_report: cannot open " + path + " for writing");
    out << "system";
    for (const std::string& c : table.columns) out << ',' << c;
    out << '\n';
    for (const auto& [name, cells] : table.rows) {
      out << name;
      for (double v : cells) out << ',' << format4(v);
      out << '\n';
    }
    out.close();
    if (!out) throw IoError("emit_report: write to " + path + " failed");
    return;
  }
  if (format == "json") {
    // Values are rounded to the emitted precision so a parse returns the
    // same numbers the CSV shows.
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, cells] : table.rows) {
      nlohmann::json row = nlohmann::json::object();
      for (std::size_t c = 0; c < cells.size(); ++c) {
        row[table.columns[c]] = std::stod(format4(cells[c]));
      }
      j[name] = std::move(row);
    }
    std::ofstream out(path);
    if (!out) throw IoError("emit_report: cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
    out.close();
    if (!out) throw IoError("emit_report: write to " + path + " failed");
    return;
  }
  throw std::invalid_argument("emit_report: unknown format '" + format + "' (csv or json)");
}

void write_novelty_dat(const std::string& path, const NoveltyReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("write_novelty_dat: cannot open " + path + " for writing");
  out << "# n";
  for (const std::string& s : report.systems) out << ' ' << s;
  out << '\n';
  for (std::size_t i = 0; i < report.n_values.size(); ++i) {
    out << report.n_values[i];
    for (std::size_t s = 0; s < report.systems.size(); ++s) {
      out << ' ' << format4(report.mean_novelty[s][i]);
    }
    out << '\n';
  }
  out.close();
  if (!out) throw IoError("write_novelty_dat: write to " + path + " failed");
}

void write_length_bucket_dat(const std::string& path,
                             const std::vector<LengthBucketRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("write_length_bucket_dat: cannot open " + path + " for writing");
  out << "# lo hi count mean_rougeL\n";
  for (const LengthBucketRow& row : rows) {
    out << row.lo << ' ' << row.hi << ' ' << row.count << ' '
        << (row.mean_rouge_l ? format4(*row.mean_rouge_l) : "nan") << '\n';
  }
  out.close();
  if (!out) throw IoError("write_length_bucket_dat: write to " + path + " failed");
}

}  // namespace rlsum
