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

#ifndef RLSUM_SAMPLING_HPP_
#define RLSUM_SAMPLING_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "rlsum/autodiff.hpp"
#include "rlsum/rng.hpp"
#include "rlsum/token_seq.hpp"

namespace rlsum {

/// Probabilities are floored at this value before any log.
inline constexpr double kProbFloor = 1e-12;

/// Per-decoding-slot distributions over the vocabulary, produced by a
/// teacher-forced forward pass. `rows` are the differentiable softmax nodes
/// (one column vector per slot); `values` mirrors them for pure-value
/// consumers. Every row sums to 1 within 1e-9.
struct ProbMatrix {
  std::vector<ad::Var> rows;
  Eigen::MatrixXd values;  // slots x vocab

  int slot_count() const { return static_cast<int>(values.rows()); }
  int vocab_size() const { return static_cast<int>(values.cols()); }
  bool empty() const { return values.rows() == 0; }

  /// Wraps plain probabilities as constant graph nodes. Rows are checked to
  /// be distributions (entries >= 0, sums within 1e-9 of 1).
  static ProbMatrix from_values(ad::Tape& tape, const Eigen::MatrixXd& probs);
};

struct GumbelConfig {
  double temperature = 0.1;  // tau
  std::uint64_t rng_seed = 0;
};

enum class SampleMethod { kArgmax, kSecondBest, kGumbel };

/// One candidate summary: hard tokens, the method that produced it, the log
/// probability of each token under the original distribution, its reward
/// against the reference, and (Gumbel only) the soft relaxed rows.
struct Candidate {
  TokenSeq tokens;
  SampleMethod method = SampleMethod::kArgmax;
  std::vector<double> token_logprobs;
  double reward = 0.0;
  std::optional<Eigen::MatrixXd> soft_rows;
};

/// Per slot, the highest-probability token; ties break toward the lowest
/// index. Throws std::invalid_argument on an empty matrix.
Candidate argmax_decode(const ProbMatrix& dist);

/// Per slot, the second-highest-probability token (argmax tie rule applied
/// after removing the argmax index). Requires vocab size >= 2.
Candidate second_best_decode(const ProbMatrix& dist);

/// -log(-log(u)) for u uniform on (0, 1), clamped away from {0, 1} by 1e-12.
double gumbel_from_uniform(double u);
/// Draws the uniform from rng and applies gumbel_from_uniform.
double gumbel_noise(Rng& rng);

/// Per slot, perturbs log-probabilities with fresh Gumbel noise per
/// vocabulary entry and applies a temperature softmax. The hard token is the
/// argmax of the soft row; token_logprobs come from the original
/// distribution. Throws std::invalid_argument for tau <= 0.
Candidate gumbel_softmax_sample(const ProbMatrix& dist, double temperature, Rng& rng);

/// Seeds a fresh rng from cfg.rng_seed, making the draw reproducible.
Candidate gumbel_softmax_sample(const ProbMatrix& dist, const GumbelConfig& cfg);

}  // namespace rlsum

#endif  // RLSUM_SAMPLING_HPP_
