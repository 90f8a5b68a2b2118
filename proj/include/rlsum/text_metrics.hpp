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

#ifndef RLSUM_TEXT_METRICS_HPP_
#define RLSUM_TEXT_METRICS_HPP_

#include <string>
#include <vector>

#include "rlsum/token_seq.hpp"

namespace rlsum {

/// Precision / recall / F1 triple, each in [0, 1].
struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Lowercases, splits on whitespace, and detaches ASCII punctuation into
/// single-character tokens. No stemming, no stopword removal; the variant is
/// deliberately the simplest deterministic one.
///
///   "The cat sat."  ->  {"the", "cat", "sat", "."}
std::vector<std::string> tokenize(const std::string& text);

/// Length of the longest common subsequence of a and b. O(|a|*|b|) dynamic
/// programming, O(min) space.
int lcs_length(const TokenSeq& a, const TokenSeq& b);

/// Clipped n-gram overlap F1 (multiset intersection). A side with fewer than
/// n tokens contributes zero grams, making its precision or recall 0.
/// Throws std::invalid_argument for n == 0.
RougeScore rouge_n_f1(const TokenSeq& reference, const TokenSeq& hypothesis, int n);

/// Summary-level ROUGE-L F1: LCS over the whole flattened sequences,
/// P = LCS/|hyp|, R = LCS/|ref|. Empty side scores 0 rather than erroring so
/// degenerate model outputs remain trainable.
RougeScore rouge_l_f1(const TokenSeq& reference, const TokenSeq& hypothesis);

/// Fraction of the summary's unique n-grams that do not occur anywhere in the
/// source. A summary with fewer than n tokens scores 0 by convention.
/// Throws std::invalid_argument for n == 0.
double ngram_novelty(const TokenSeq& source, const TokenSeq& summary, int n);

}  // namespace rlsum

#endif  // RLSUM_TEXT_METRICS_HPP_
