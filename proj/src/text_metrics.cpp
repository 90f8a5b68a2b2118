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

#include "rlsum/text_metrics.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>
#include <unordered_set>

namespace rlsum {

namespace {

bool is_ascii_punct(unsigned char c) { return c < 128 && std::ispunct(c); }
bool is_ascii_space(unsigned char c) { return c < 128 && std::isspace(c); }

double f1_of(double p, double r) {
  return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

// Packs an n-gram starting at position i into a hashable key.
struct NgramHash {
  std::size_t operator()(const std::vector<int>& g) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (int t : g) {
      h ^= static_cast<std::size_t>(t) + 0x9e3779b9ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
};

using NgramCounts = std::unordered_map<std::vector<int>, int, NgramHash>;
using NgramSet = std::unordered_set<std::vector<int>, NgramHash>;

NgramCounts count_ngrams(const std::vector<int>& tokens, int n) {
  NgramCounts counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
    counts[std::vector<int>(tokens.begin() + static_cast<long>(i),
                            tokens.begin() + static_cast<long>(i) + n)]++;
  }
  return counts;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) {
      out.push_back(word);
      word.clear();
    }
  };
  for (unsigned char c : text) {
    if (is_ascii_space(c)) {
      flush();
    } else if (is_ascii_punct(c)) {
      flush();
      out.emplace_back(1, static_cast<char>(c));
    } else {
      word.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return out;
}

int lcs_length(const TokenSeq& a, const TokenSeq& b) {
  const auto& x = a.tokens;
  const auto& y = b.tokens;
  if (x.empty() || y.empty()) return 0;
  // Row-rolling DP keeps memory at O(|y|).
  std::vector<int> prev(y.size() + 1, 0), cur(y.size() + 1, 0);
  for (std::size_t i = 1; i <= x.size(); ++i) {
    for (std::size_t j = 1; j <= y.size(); ++j) {
      cur[j] = (x[i - 1] == y[j - 1]) ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[y.size()];
}

RougeScore rouge_n_f1(const TokenSeq& reference, const TokenSeq& hypothesis, int n) {
  if (n <= 0) throw std::invalid_argument("rouge_n_f1: n must be >= 1");
  const NgramCounts ref_counts = count_ngrams(reference.tokens, n);
  const NgramCounts hyp_counts = count_ngrams(hypothesis.tokens, n);
  long ref_total = 0, hyp_total = 0, matched = 0;
  for (const auto& [g, c] : ref_counts) ref_total += c;
  for (const auto& [g, c] : hyp_counts) {
    hyp_total += c;
    auto it = ref_counts.find(g);
    if (it != ref_counts.end()) matched += std::min(c, it->second);
  }
  RougeScore s;
  s.precision = hyp_total > 0 ? static_cast<double>(matched) / static_cast<double>(hyp_total) : 0.0;
  s.recall = ref_total > 0 ? static_cast<double>(matched) / static_cast<double>(ref_total) : 0.0;
  s.f1 = f1_of(s.precision, s.recall);
  return s;
}

RougeScore rouge_l_f1(const TokenSeq& reference, const TokenSeq& hypothesis) {
  RougeScore s;
  if (reference.empty() || hypothesis.empty()) return s;
  const double lcs = static_cast<double>(lcs_length(reference, hypothesis));
  s.precision = lcs / static_cast<double>(hypothesis.size());
  s.recall = lcs / static_cast<double>(reference.size());
  s.f1 = f1_of(s.precision, s.recall);
  return s;
}

double ngram_novelty(const TokenSeq& source, const TokenSeq& summary, int n) {
  if (n <= 0) throw std::invalid_argument("ngram_novelty: n must be >= 1");
  if (summary.size() < n) return 0.0;
  NgramSet source_grams;
  for (const auto& [g, c] : count_ngrams(source.tokens, n)) source_grams.insert(g);
  NgramSet summary_grams;
  for (const auto& [g, c] : count_ngrams(summary.tokens, n)) summary_grams.insert(g);
  if (summary_grams.empty()) return 0.0;
  std::size_t novel = 0;
  for (const auto& g : summary_grams) {
    if (source_grams.find(g) == source_grams.end()) ++novel;
  }
  return static_cast<double>(novel) / static_cast<double>(summary_grams.size());
}

}  // namespace rlsum
