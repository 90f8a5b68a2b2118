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

#include "rlsum/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rlsum {

namespace {

void check_nonempty(const ProbMatrix& dist, const char* op) {
  if (dist.empty() || dist.vocab_size() == 0) {
    throw std::invalid_argument(std::string(op) + ": empty probability matrix");
  }
}

// Lowest index among the row's maxima.
int argmax_index(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  int best = 0;
  for (int j = 1; j < row.size(); ++j) {
    if (row(j) > row(best)) best = j;
  }
  return best;
}

double floored_log(double p) { return std::log(std::max(p, kProbFloor)); }

}  // namespace

ProbMatrix ProbMatrix::from_values(ad::Tape& tape, const Eigen::MatrixXd& probs) {
  ProbMatrix out;
  out.values = probs;
  out.rows.reserve(static_cast<std::size_t>(probs.rows()));
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    if ((probs.row(i).array() < 0.0).any()) {
      throw std::invalid_argument("ProbMatrix::from_values: negative probability in row " +
                                  std::to_string(i));
    }
    const double sum = probs.row(i).sum();
    if (std::abs(sum - 1.0) > 1e-9) {
      throw std::invalid_argument("ProbMatrix::from_values: row " + std::to_string(i) +
                                  " sums to " + std::to_string(sum));
    }
    out.rows.push_back(tape.constant(probs.row(i).transpose()));
  }
  return out;
}

Candidate argmax_decode(const ProbMatrix& dist) {
  check_nonempty(dist, "argmax_decode");
  Candidate c;
  c.method = SampleMethod::kArgmax;
  c.tokens.vocab_size = dist.vocab_size();
  for (int i = 0; i < dist.slot_count(); ++i) {
    const int tok = argmax_index(dist.values.row(i));
    c.tokens.tokens.push_back(tok);
    c.token_logprobs.push_back(floored_log(dist.values(i, tok)));
  }
  return c;
}

Candidate second_best_decode(const ProbMatrix& dist) {
  check_nonempty(dist, "second_best_decode");
  if (dist.vocab_size() < 2) {
    throw std::invalid_argument("second_best_decode: needs vocab size >= 2");
  }
  Candidate c;
  c.method = SampleMethod::kSecondBest;
  c.tokens.vocab_size = dist.vocab_size();
  for (int i = 0; i < dist.slot_count(); ++i) {
    const int top = argmax_index(dist.values.row(i));
    int second = (top == 0) ? 1 : 0;
    for (int j = 0; j < dist.vocab_size(); ++j) {
      if (j == top) continue;
      if (dist.values(i, j) > dist.values(i, second)) second = j;
    }
    c.tokens.tokens.push_back(second);
    c.token_logprobs.push_back(floored_log(dist.values(i, second)));
  }
  return c;
}

double gumbel_from_uniform(double u) {
  const double clamped = std::clamp(u, 1e-12, 1.0 - 1e-12);
  return -std::log(-std::log(clamped));
}

double gumbel_noise(Rng& rng) { return gumbel_from_uniform(rng.uniform()); }

Candidate gumbel_softmax_sample(const ProbMatrix& dist, double temperature, Rng& rng) {
  check_nonempty(dist, "gumbel_softmax_sample");
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("gumbel_softmax_sample: temperature must be > 0");
  }
  Candidate c;
  c.method = SampleMethod::kGumbel;
  c.tokens.vocab_size = dist.vocab_size();
  const int slots = dist.slot_count();
  const int vocab = dist.vocab_size();
  Eigen::MatrixXd soft(slots, vocab);
  for (int i = 0; i < slots; ++i) {
    Eigen::RowVectorXd perturbed(vocab);
    for (int j = 0; j < vocab; ++j) {
      perturbed(j) = (floored_log(dist.values(i, j)) + gumbel_noise(rng)) / temperature;
    }
    const double shift = perturbed.maxCoeff();
    Eigen::RowVectorXd z = (perturbed.array() - shift).exp();
    soft.row(i) = z / z.sum();
    const int tok = argmax_index(soft.row(i));
    c.tokens.tokens.push_back(tok);
    c.token_logprobs.push_back(floored_log(dist.values(i, tok)));
  }
  c.soft_rows = std::move(soft);
  return c;
}

Candidate gumbel_softmax_sample(const ProbMatrix& dist, const GumbelConfig& cfg) {
  Rng rng(cfg.rng_seed);
  return gumbel_softmax_sample(dist, cfg.temperature, rng);
}

}  // namespace rlsum
