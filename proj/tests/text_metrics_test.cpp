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

#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "rlsum/rng.hpp"
#include "rlsum/token_seq.hpp"

using namespace rlsum;

namespace {
TokenSeq seq(std::vector<int> tokens, int vocab = 100) {
  return TokenSeq(std::move(tokens), vocab);
}
}  // namespace

TEST_CASE("text_metrics: tokenize lowercases and splits punctuation") {
  CHECK(tokenize("The cat, sat.") == std::vector<std::string>{"the", "cat", ",", "sat", "."});
  CHECK(tokenize("  spaced\tout\n") == std::vector<std::string>{"spaced", "out"});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("a-b c's") == std::vector<std::string>{"a", "-", "b", "c", "'", "s"});
}

TEST_CASE("text_metrics: lcs_length on known pairs") {
  CHECK(lcs_length(seq({1, 2, 3, 2, 4, 1, 2}), seq({2, 4, 3, 1, 2, 1})) == 4);
  CHECK(lcs_length(seq({1, 2, 3}), seq({1, 2, 3})) == 3);
  CHECK(lcs_length(seq({1, 2, 3}), seq({4, 5, 6})) == 0);
  CHECK(lcs_length(seq({}), seq({1})) == 0);
}

TEST_CASE("text_metrics: lcs_length agrees with exhaustive enumeration") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> a(1 + rng.uniform_int(10)), b(1 + rng.uniform_int(10));
    for (int& t : a) t = static_cast<int>(rng.uniform_int(5));
    for (int& t : b) t = static_cast<int>(rng.uniform_int(5));
    CHECK(lcs_length(seq(a, 5), seq(b, 5)) == oracles::brute_force_lcs(a, b));
  }
}

TEST_CASE("text_metrics: rouge_n_f1 unigram overlap") {
  const RougeScore s = rouge_n_f1(seq({1, 2, 3}), seq({1, 2, 4}), 1);
  CHECK(s.precision == doctest::Approx(2.0 / 3.0));
  CHECK(s.recall == doctest::Approx(2.0 / 3.0));
  CHECK(s.f1 == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("text_metrics: rouge_n_f1 clips repeated n-grams") {
  // Hypothesis has three copies of token 1 but the reference only two.
  const RougeScore s = rouge_n_f1(seq({1, 1, 2}), seq({1, 1, 1}), 1);
  CHECK(s.precision == doctest::Approx(2.0 / 3.0));
  CHECK(s.recall == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("text_metrics: rouge_n_f1 bigrams") {
  const RougeScore s = rouge_n_f1(seq({1, 2, 3}), seq({1, 2, 4}), 2);
  CHECK(s.precision == doctest::Approx(0.5));
  CHECK(s.recall == doctest::Approx(0.5));
  CHECK(s.f1 == doctest::Approx(0.5));
}

TEST_CASE("text_metrics: rouge_n_f1 degenerate inputs") {
  CHECK(rouge_n_f1(seq({}), seq({1}), 1).f1 == 0.0);
  CHECK(rouge_n_f1(seq({1}), seq({}), 1).f1 == 0.0);
  CHECK(rouge_n_f1(seq({1}), seq({1}), 2).f1 == 0.0);  // too short for bigrams
  CHECK_THROWS_AS(rouge_n_f1(seq({1}), seq({1}), 0), std::invalid_argument);
}

TEST_CASE("text_metrics: rouge_l_f1 hand-checked values") {
  const RougeScore s = rouge_l_f1(seq({1, 2, 3, 4}), seq({2, 4}));
  CHECK(s.precision == doctest::Approx(1.0));
  CHECK(s.recall == doctest::Approx(0.5));
  CHECK(s.f1 == doctest::Approx(2.0 / 3.0));
  CHECK(rouge_l_f1(seq({1, 2}), seq({1, 2})).f1 == doctest::Approx(1.0));
  CHECK(rouge_l_f1(seq({}), seq({1})).f1 == 0.0);
}

TEST_CASE("text_metrics: rouge_l_f1 is bit-equal to the enumeration oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<int> a(1 + rng.uniform_int(12)), b(1 + rng.uniform_int(12));
    for (int& t : a) t = static_cast<int>(rng.uniform_int(10));
    for (int& t : b) t = static_cast<int>(rng.uniform_int(10));
    CHECK(rouge_l_f1(seq(a, 10), seq(b, 10)).f1 == oracles::brute_force_rouge_l_f1(a, b));
  }
}

TEST_CASE("text_metrics: ngram_novelty counts distinct absent n-grams") {
  CHECK(ngram_novelty(seq({1, 2, 3}), seq({2, 3, 4}), 1) == doctest::Approx(1.0 / 3.0));
  CHECK(ngram_novelty(seq({1, 2, 3}), seq({2, 3, 4}), 2) == doctest::Approx(0.5));
  CHECK(ngram_novelty(seq({1, 2, 3}), seq({2, 3, 4}), 3) == doctest::Approx(1.0));
  CHECK(ngram_novelty(seq({1, 2}), seq({3, 3, 3}), 1) == doctest::Approx(1.0));
  CHECK(ngram_novelty(seq({1, 2}), seq({1}), 2) == 0.0);  // summary shorter than n
  CHECK_THROWS_AS(ngram_novelty(seq({1}), seq({1}), 0), std::invalid_argument);
}

TEST_CASE("text_metrics: ngram_novelty drops to zero when source covers summary") {
  const TokenSeq summary = seq({5, 6, 7, 5});
  const TokenSeq source = seq({5, 6, 7, 5, 6, 7, 5});  // contains every summary bigram
  CHECK(ngram_novelty(source, summary, 1) == 0.0);
  CHECK(ngram_novelty(source, summary, 2) == 0.0);
}

TEST_CASE("text_metrics: ngram_novelty agrees with the set oracle") {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> src(1 + rng.uniform_int(15)), sum(1 + rng.uniform_int(8));
    for (int& t : src) t = static_cast<int>(rng.uniform_int(7));
    for (int& t : sum) t = static_cast<int>(rng.uniform_int(7));
    for (int n = 1; n <= 3; ++n) {
      CHECK(ngram_novelty(seq(src, 7), seq(sum, 7), n) ==
            oracles::brute_force_novelty(src, sum, n));
    }
  }
}
