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

#ifndef RLSUM_ANALYSIS_HPP_
#define RLSUM_ANALYSIS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rlsum/data.hpp"
#include "rlsum/token_seq.hpp"

namespace rlsum {

/// Per-example scores of a candidate system (a) against a baseline (b),
/// aligned by example.
struct PairedScores {
  std::vector<double> system_a;
  std::vector<double> system_b;
  std::string metric = "rougeL";

  /// Equal lengths >= 2, every value in [0, 1]; std::invalid_argument
  /// otherwise.
  void validate() const;
};

struct BootstrapResult {
  double p_value = 1.0;
  bool significant = false;
};

/// One-sided paired bootstrap over example indices: p is the fraction of
/// resamples in which the resampled mean of system_a does not exceed that of
/// system_b; significant iff p < alpha. Deterministic given seed. Requires
/// resamples >= 1000.
BootstrapResult bootstrap_test(const PairedScores& scores, int resamples = 10000,
                               double alpha = 0.05, std::uint64_t seed = 0);

/// Mean unique-n-gram novelty per system per n.
struct NoveltyReport {
  std::vector<int> n_values;
  std::vector<std::string> systems;
  std::vector<std::vector<double>> mean_novelty;  // [system][index into n_values]
};

/// Means ngram_novelty over aligned (source, summary) pairs for each system
/// and each n. Every system must supply one summary per source.
NoveltyReport novelty_profile(
    const std::vector<TokenSeq>& sources,
    const std::vector<std::pair<std::string, std::vector<TokenSeq>>>& summaries_per_system,
    const std::vector<int>& n_values = {1, 2, 3});

/// One reference-length interval [lo, hi); the last bucket is open-ended.
struct LengthBucketRow {
  int lo = 0;
  int hi = 0;  // exclusive; INT_MAX marks the open tail
  long long count = 0;
  std::optional<double> mean_rouge_l;  // empty bucket -> nullopt
};

/// Buckets examples by reference-summary token length at the given strictly
/// increasing edges and reports mean ROUGE-L F1 of the aligned system
/// summaries per bucket. Counts over all buckets sum to the corpus size.
std::vector<LengthBucketRow> length_bucket_rouge(const std::vector<Example>& examples,
                                                 const std::vector<TokenSeq>& summaries,
                                                 const std::vector<int>& bucket_edges = {4, 8, 12,
                                                                                         16});

/// A named-row metric table with a stable column order, the common shape of
/// every emitted report.
struct ReportTable {
  std::vector<std::string> columns;
  std::vector<std::pair<std::string, std::vector<double>>> rows;  // system -> cells
};

/// Writes the table to path as "csv" (header always present) or "json" (one
/// object keyed by system name). Floats carry exactly 4 decimal places in
/// both formats, so emit-then-parse round-trips at that precision.
void emit_report(const ReportTable& table, const std::string& path, const std::string& format);

/// Whitespace-separated gnuplot data: one row per n, one column per system.
void write_novelty_dat(const std::string& path, const NoveltyReport& report);

/// Whitespace-separated gnuplot data: lo hi count mean ("nan" when empty).
void write_length_bucket_dat(const std::string& path,
                             const std::vector<LengthBucketRow>& rows);

}  // namespace rlsum

#endif  // RLSUM_ANALYSIS_HPP_
