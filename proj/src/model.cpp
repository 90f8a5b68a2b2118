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

#include "rlsum/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "rlsum/errors.hpp"
#include "rlsum/rng.hpp"

namespace rlsum {

namespace {

// Per-tape view of one GRU cell's leased parameters.
struct LeasedGru {
  ad::Var w_z, u_z, b_z;
  ad::Var w_r, u_r, b_r;
  ad::Var w_n, u_n, b_n;
};

LeasedGru lease(ad::Tape& tape, GruCellParams& p) {
  return LeasedGru{tape.leaf(p.w_z), tape.leaf(p.u_z), tape.leaf(p.b_z),
                   tape.leaf(p.w_r), tape.leaf(p.u_r), tape.leaf(p.b_r),
                   tape.leaf(p.w_n), tape.leaf(p.u_n), tape.leaf(p.b_n)};
}

// z = sigma(Wz x + Uz h + bz); r = sigma(Wr x + Ur h + br);
// n = tanh(Wn x + r . (Un h) + bn); h' = (1-z) . n + z . h
ad::Var gru_step(const LeasedGru& g, const ad::Var& x, const ad::Var& h) {
  const ad::Var z = ad::sigmoid(ad::matmul(g.w_z, x) + ad::matmul(g.u_z, h) + g.b_z);
  const ad::Var r = ad::sigmoid(ad::matmul(g.w_r, x) + ad::matmul(g.u_r, h) + g.b_r);
  const ad::Var n =
      ad::tanh(ad::matmul(g.w_n, x) + ad::cwise_mul(r, ad::matmul(g.u_n, h)) + g.b_n);
  return ad::cwise_mul(ad::affine(z, -1.0, 1.0), n) + ad::cwise_mul(z, h);
}

void check_tokens(const TokenSeq& seq, int vocab, const char* which) {
  if (seq.tokens.empty()) {
    throw std::invalid_argument(std::string("forward_teacher_forced: empty ") + which);
  }
  for (int tok : seq.tokens) {
    if (tok < 0 || tok >= vocab) {
      throw std::invalid_argument(std::string("forward_teacher_forced: ") + which + " token " +
                                  std::to_string(tok) + " outside vocabulary of size " +
                                  std::to_string(vocab));
    }
  }
}

void fill_uniform(ad::Parameter& p, Rng& rng, double half_range) {
  double* data = p.value.data();
  for (Eigen::Index i = 0; i < p.value.size(); ++i) {
    data[i] = (2.0 * rng.uniform() - 1.0) * half_range;
  }
}

}  // namespace

std::vector<ad::Parameter*> Seq2SeqModel::parameters() {
  return {&embedding,
          &encoder.w_z, &encoder.u_z, &encoder.b_z,
          &encoder.w_r, &encoder.u_r, &encoder.b_r,
          &encoder.w_n, &encoder.u_n, &encoder.b_n,
          &decoder.w_z, &decoder.u_z, &decoder.b_z,
          &decoder.w_r, &decoder.u_r, &decoder.b_r,
          &decoder.w_n, &decoder.u_n, &decoder.b_n,
          &out_w, &out_b};
}

std::vector<const ad::Parameter*> Seq2SeqModel::parameters() const {
  auto* self = const_cast<Seq2SeqModel*>(this);
  std::vector<const ad::Parameter*> out;
  for (ad::Parameter* p : self->parameters()) out.push_back(p);
  return out;
}

long long Seq2SeqModel::parameter_count() const {
  long long total = 0;
  for (const ad::Parameter* p : parameters()) total += static_cast<long long>(p->value.size());
  return total;
}

Seq2SeqModel init_model(int vocab_size, int hidden, std::uint64_t seed) {
  if (vocab_size < kNumReservedIds) {
    throw std::invalid_argument("init_model: vocab_size must be >= " +
                                std::to_string(kNumReservedIds));
  }
  if (hidden < 1) throw std::invalid_argument("init_model: hidden must be >= 1");

  const int v = vocab_size;
  const int d = hidden;
  Seq2SeqModel m;
  m.embedding = ad::Parameter("embedding", ad::Matrix::Zero(v, d));
  auto make_cell = [d](GruCellParams& cell, const std::string& prefix) {
    cell.w_z = ad::Parameter(prefix + ".w_z", ad::Matrix::Zero(d, d));
    cell.u_z = ad::Parameter(prefix + ".u_z", ad::Matrix::Zero(d, d));
    cell.b_z = ad::Parameter(prefix + ".b_z", ad::Matrix::Zero(d, 1));
    cell.w_r = ad::Parameter(prefix + ".w_r", ad::Matrix::Zero(d, d));
    cell.u_r = ad::Parameter(prefix + ".u_r", ad::Matrix::Zero(d, d));
    cell.b_r = ad::Parameter(prefix + ".b_r", ad::Matrix::Zero(d, 1));
    cell.w_n = ad::Parameter(prefix + ".w_n", ad::Matrix::Zero(d, d));
    cell.u_n = ad::Parameter(prefix + ".u_n", ad::Matrix::Zero(d, d));
    cell.b_n = ad::Parameter(prefix + ".b_n", ad::Matrix::Zero(d, 1));
  };
  make_cell(m.encoder, "encoder");
  make_cell(m.decoder, "decoder");
  m.out_w = ad::Parameter("out_w", ad::Matrix::Zero(v, d));
  m.out_b = ad::Parameter("out_b", ad::Matrix::Zero(v, 1));

  Rng rng(seed);
  for (ad::Parameter* p : m.parameters()) fill_uniform(*p, rng, 0.08);
  return m;
}

ProbMatrix forward_teacher_forced(ad::Tape& tape, Seq2SeqModel& model, const TokenSeq& source,
                                  const TokenSeq& target) {
  const int v = model.vocab_size();
  const int d = model.hidden_size();
  check_tokens(source, v, "source");
  check_tokens(target, v, "target");

  const ad::Var emb = tape.leaf(model.embedding);
  const LeasedGru enc = lease(tape, model.encoder);
  const LeasedGru dec = lease(tape, model.decoder);
  const ad::Var out_w = tape.leaf(model.out_w);
  const ad::Var out_b = tape.leaf(model.out_b);

  // The encoder reads the source right-to-left so the earliest source tokens
  // are freshest in the handoff state (Sutskever-style input reversal).
  ad::Var h = tape.constant(ad::Matrix::Zero(d, 1));
  for (auto it = source.tokens.rbegin(); it != source.tokens.rend(); ++it) {
    h = gru_step(enc, ad::embed_row(emb, *it), h);
  }

  const int m = static_cast<int>(target.tokens.size());
  ProbMatrix out;
  out.values.resize(m, v);
  out.rows.reserve(static_cast<std::size_t>(m));
  int input_tok = kBosId;
  for (int i = 0; i < m; ++i) {
    h = gru_step(dec, ad::embed_row(emb, input_tok), h);
    const ad::Var probs = ad::softmax(ad::matmul(out_w, h) + out_b);
    out.values.row(i) = probs.value().transpose();
    out.rows.push_back(probs);
    input_tok = target.tokens[static_cast<std::size_t>(i)];
  }
  return out;
}

void sgd_step(Seq2SeqModel& model, double lr, double clip_norm) {
  if (!(lr > 0.0)) throw std::invalid_argument("sgd_step: lr must be > 0");
  if (!(clip_norm > 0.0)) throw std::invalid_argument("sgd_step: clip_norm must be > 0");

  const std::vector<ad::Parameter*> params = model.parameters();
  double sq_sum = 0.0;
  for (const ad::Parameter* p : params) {
    if (!p->has_grad) throw StateError("sgd_step: gradient for " + p->name + " not populated");
    sq_sum += p->grad.squaredNorm();
  }
  if (!std::isfinite(sq_sum)) throw NumericalError("sgd_step: non-finite gradient norm");

  const double norm = std::sqrt(sq_sum);
  const double scale = (norm > clip_norm) ? clip_norm / norm : 1.0;
  for (ad::Parameter* p : params) {
    p->value -= (lr * scale) * p->grad;
    p->zero_grad();
  }
}

}  // namespace rlsum
