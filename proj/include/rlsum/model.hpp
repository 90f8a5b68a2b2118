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

#ifndef RLSUM_MODEL_HPP_
#define RLSUM_MODEL_HPP_

#include <cstdint>
#include <vector>

#include "rlsum/autodiff.hpp"
#include "rlsum/sampling.hpp"
#include "rlsum/token_seq.hpp"

namespace rlsum {

/// Gated recurrent cell weights. All matrices are d x d, biases d x 1; the
/// input is the d-dimensional token embedding.
struct GruCellParams {
  ad::Parameter w_z, u_z, b_z;  // update gate
  ad::Parameter w_r, u_r, b_r;  // reset gate
  ad::Parameter w_n, u_n, b_n;  // candidate state
};

/// Single-layer GRU encoder-decoder with a shared embedding table and a
/// linear-softmax output head. Deliberately tiny: the point is exact
/// gradients and fast experiments, not capacity.
class Seq2SeqModel {
 public:
  Seq2SeqModel() = default;

  int vocab_size() const { return static_cast<int>(embedding.value.rows()); }
  int hidden_size() const { return static_cast<int>(embedding.value.cols()); }

  /// All 21 parameters in canonical order: embedding, encoder gates,
  /// decoder gates, output projection, output bias. Checkpointing, gradient
  /// flattening, and the optimizer all rely on this order.
  std::vector<ad::Parameter*> parameters();
  std::vector<const ad::Parameter*> parameters() const;

  /// Total scalar count: 2*V*d + 12*d^2 + 6*d + V.
  long long parameter_count() const;

  ad::Parameter embedding;  // V x d, shared by encoder and decoder inputs
  GruCellParams encoder;
  GruCellParams decoder;
  ad::Parameter out_w;  // V x d
  ad::Parameter out_b;  // V x 1

  bool nll_warm_started = false;
  long long iterations_trained = 0;
};

/// Fresh model with every weight drawn uniformly from [-0.08, 0.08] by a
/// generator seeded with `seed`; the same seed reproduces the model bitwise.
/// Requires vocab_size >= 4 (reserved ids) and hidden >= 1.
Seq2SeqModel init_model(int vocab_size, int hidden, std::uint64_t seed);

/// Teacher-forced forward pass on `tape`: the encoder folds the source into
/// the initial decoder state, then the decoder consumes [bos] followed by
/// the first |target|-1 target tokens and emits one probability row per
/// target position. Throws std::invalid_argument on empty input or tokens
/// outside the model's vocabulary.
ProbMatrix forward_teacher_forced(ad::Tape& tape, Seq2SeqModel& model, const TokenSeq& source,
                                  const TokenSeq& target);

/// Scales gradients so their global norm is at most clip_norm, applies
/// theta <- theta - lr * grad, and zeroes all gradients. Every parameter
/// must hold a populated gradient (StateError otherwise); non-finite
/// gradients raise NumericalError.
void sgd_step(Seq2SeqModel& model, double lr, double clip_norm);

}  // namespace rlsum

#endif  // RLSUM_MODEL_HPP_
