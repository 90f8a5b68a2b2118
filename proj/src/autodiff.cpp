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

#include "rlsum/autodiff.hpp"

#include <cmath>
#include <utility>

namespace rlsum::ad {

namespace {

void check_attached(const Var& v, const char* op) {
  if (!v.attached()) throw StateError(std::string(op) + ": detached Var");
}

Tape& common_tape(const Var& a, const Var& b, const char* op) {
  check_attached(a, op);
  check_attached(b, op);
  if (a.tape() != b.tape()) throw StateError(std::string(op) + ": operands on different tapes");
  return *a.tape();
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.value().rows() != b.value().rows() || a.value().cols() != b.value().cols())
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

}  // namespace

const Matrix& Var::value() const {
  if (!attached()) throw StateError("Var::value: detached Var");
  return tape_->value_of(id_);
}

double Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) throw std::invalid_argument("Var::scalar: node is not 1x1");
  return v(0, 0);
}

Matrix Var::grad() const {
  if (!attached()) throw StateError("Var::grad: detached Var");
  if (tape_->grad_touched(id_)) return tape_->grad_slot(id_);
  const Matrix& v = tape_->value_of(id_);
  return Matrix::Zero(v.rows(), v.cols());
}

int Tape::add_node(Matrix value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = grad_enabled_ && requires_grad;
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

void Tape::set_backprop(int id, std::function<void(Tape&)> backprop) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.requires_grad) n.backprop = std::move(backprop);
}

Matrix& Tape::grad_slot(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.grad_init) {
    n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
    n.grad_init = true;
  }
  return n.grad;
}

void Tape::accumulate(int id, const Matrix& g) {
  if (!nodes_[static_cast<std::size_t>(id)].requires_grad) return;
  grad_slot(id) += g;
}

Var Tape::constant(Matrix value) { return make_var(add_node(std::move(value), false)); }

Var Tape::scalar_constant(double value) {
  Matrix m(1, 1);
  m(0, 0) = value;
  return constant(std::move(m));
}

Var Tape::leaf(Parameter& param) {
  const int id = add_node(param.value, true);
  nodes_[static_cast<std::size_t>(id)].bound = &param;
  return make_var(id);
}

void Tape::backward(const Var& loss) {
  if (!loss.attached()) throw StateError("backward: detached loss");
  if (loss.tape() != this) throw StateError("backward: loss belongs to another tape");
  if (!grad_enabled_) throw StateError("backward: tape was built with gradients disabled");
  if (backward_done_) throw StateError("backward: already called on this tape");
  if (loss.value().size() != 1) throw std::invalid_argument("backward: loss must be 1x1");
  backward_done_ = true;

  if (nodes_[static_cast<std::size_t>(loss.id())].requires_grad) {
    grad_slot(loss.id())(0, 0) += 1.0;
  }
  for (int id = static_cast<int>(nodes_.size()) - 1; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.backprop && n.grad_init) n.backprop(*this);
  }
  // A constant loss still flushes: bound parameters receive their (possibly
  // all-zero) gradient contribution and are marked populated.
  for (auto& n : nodes_) {
    if (n.bound != nullptr) {
      if (n.grad_init) n.bound->grad += n.grad;
      n.bound->has_grad = true;
    }
  }
}

Var add(const Var& a, const Var& b) {
  Tape& t = common_tape(a, b, "add");
  check_same_shape(a, b, "add");
  const int aid = a.id(), bid = b.id();
  const int out = t.add_node(a.value() + b.value(), t.requires_grad(aid) || t.requires_grad(bid));
  t.set_backprop(out, [out, aid, bid](Tape& tp) {
    const Matrix& g = tp.grad_slot(out);
    tp.accumulate(aid, g);
    tp.accumulate(bid, g);
  });
  return t.make_var(out);
}

Var sub(const Var& a, const Var& b) {
  Tape& t = common_tape(a, b, "sub");
  check_same_shape(a, b, "sub");
  const int aid = a.id(), bid = b.id();
  const int out = t.add_node(a.value() - b.value(), t.requires_grad(aid) || t.requires_grad(bid));
  t.set_backprop(out, [out, aid, bid](Tape& tp) {
    const Matrix& g = tp.grad_slot(out);
    tp.accumulate(aid, g);
    tp.accumulate(bid, -g);
  });
  return t.make_var(out);
}

Var cwise_mul(const Var& a, const Var& b) {
  Tape& t = common_tape(a, b, "cwise_mul");
  check_same_shape(a, b, "cwise_mul");
  const int aid = a.id(), bid = b.id();
  const int out =
      t.add_node(a.value().cwiseProduct(b.value()), t.requires_grad(aid) || t.requires_grad(bid));
  t.set_backprop(out, [out, aid, bid](Tape& tp) {
    const Matrix& g = tp.grad_slot(out);
    tp.accumulate(aid, g.cwiseProduct(tp.value_of(bid)));
    tp.accumulate(bid, g.cwiseProduct(tp.value_of(aid)));
  });
  return t.make_var(out);
}

Var matmul(const Var& a, const Var& b) {
  Tape& t = common_tape(a, b, "matmul");
  if (a.value().cols() != b.value().rows())
    throw std::invalid_argument("matmul: inner dimensions disagree");
  const int aid = a.id(), bid = b.id();
  const int out = t.add_node(a.value() * b.value(), t.requires_grad(aid) || t.requires_grad(bid));
  t.set_backprop(out, [out, aid, bid](Tape& tp) {
    const Matrix& g = tp.grad_slot(out);
    tp.accumulate(aid, g * tp.value_of(bid).transpose());
    tp.accumulate(bid, tp.value_of(aid).transpose() * g);
  });
  return t.make_var(out);
}

Var affine(const Var& x, double scale, double shift) {
  check_attached(x, "affine");
  Tape& t = *x.tape();
  const int xid = x.id();
  const int out = t.add_node((x.value().array() * scale + shift).matrix(), t.requires_grad(xid));
  t.set_backprop(out, [out, xid, scale](Tape& tp) {
    tp.accumulate(xid, tp.grad_slot(out) * scale);
  });
  return t.make_var(out);
}

Var sigmoid(const Var& x) {
  check_attached(x, "sigmoid");
  Tape& t = *x.tape();
  const int xid = x.id();
  Matrix v = (1.0 / (1.0 + (-x.value().array()).exp())).matrix();
  const int out = t.add_node(std::move(v), t.requires_grad(xid));
  t.set_backprop(out, [out, xid](Tape& tp) {
    const Matrix& s = tp.value_of(out);
    tp.accumulate(xid,
                  tp.grad_slot(out).cwiseProduct((s.array() * (1.0 - s.array())).matrix()));
  });
  return t.make_var(out);
}

Var tanh(const Var& x) {
  check_attached(x, "tanh");
  Tape& t = *x.tape();
  const int xid = x.id();
  const int out = t.add_node(x.value().array().tanh().matrix(), t.requires_grad(xid));
  t.set_backprop(out, [out, xid](Tape& tp) {
    const Matrix& th = tp.value_of(out);
    tp.accumulate(xid, tp.grad_slot(out).cwiseProduct((1.0 - th.array().square()).matrix()));
  });
  return t.make_var(out);
}

Var exp(const Var& x) {
  check_attached(x, "exp");
  Tape& t = *x.tape();
  const int xid = x.id();
  const int out = t.add_node(x.value().array().exp().matrix(), t.requires_grad(xid));
  t.set_backprop(out, [out, xid](Tape& tp) {
    tp.accumulate(xid, tp.grad_slot(out).cwiseProduct(tp.value_of(out)));
  });
  return t.make_var(out);
}

Var div(const Var& a, const Var& b) {
  Tape& t = common_tape(a, b, "div");
  if (a.value().size() != 1 || b.value().size() != 1)
    throw std::invalid_argument("div: expected 1x1 nodes");
  const int aid = a.id(), bid = b.id();
  Matrix v(1, 1);
  v(0, 0) = a.value()(0, 0) / b.value()(0, 0);
  const int out = t.add_node(std::move(v), t.requires_grad(aid) || t.requires_grad(bid));
  t.set_backprop(out, [out, aid, bid](Tape& tp) {
    const double g = tp.grad_slot(out)(0, 0);
    const double bv = tp.value_of(bid)(0, 0);
    const double q = tp.value_of(out)(0, 0);
    Matrix ga(1, 1), gb(1, 1);
    ga(0, 0) = g / bv;
    gb(0, 0) = -g * q / bv;
    tp.accumulate(aid, ga);
    tp.accumulate(bid, gb);
  });
  return t.make_var(out);
}

Var softmax(const Var& logits) {
  check_attached(logits, "softmax");
  if (logits.value().cols() != 1) throw std::invalid_argument("softmax: expected a column vector");
  Tape& t = *logits.tape();
  const int xid = logits.id();
  const auto& z = logits.value().array();
  Eigen::ArrayXd shifted = (z - z.maxCoeff()).exp();
  Matrix v = (shifted / shifted.sum()).matrix();
  const int out = t.add_node(std::move(v), t.requires_grad(xid));
  t.set_backprop(out, [out, xid](Tape& tp) {
    const Matrix& y = tp.value_of(out);
    const Matrix& g = tp.grad_slot(out);
    const double dot = (y.array() * g.array()).sum();
    tp.accumulate(xid, (y.array() * (g.array() - dot)).matrix());
  });
  return t.make_var(out);
}

Var embed_row(const Var& table, int row) {
  check_attached(table, "embed_row");
  if (row < 0 || row >= table.value().rows())
    throw std::invalid_argument("embed_row: row index out of range");
  Tape& t = *table.tape();
  const int tid = table.id();
  const int out = t.add_node(table.value().row(row).transpose(), t.requires_grad(tid));
  t.set_backprop(out, [out, tid, row](Tape& tp) {
    tp.grad_slot(tid).row(row) += tp.grad_slot(out).transpose();
  });
  return t.make_var(out);
}

Var log_pick(const Var& vec, int index, double floor) {
  check_attached(vec, "log_pick");
  if (vec.value().cols() != 1) throw std::invalid_argument("log_pick: expected a column vector");
  if (index < 0 || index >= vec.value().rows())
    throw std::invalid_argument("log_pick: index out of range");
  Tape& t = *vec.tape();
  const int vid = vec.id();
  const double raw = vec.value()(index, 0);
  const bool clamped = raw < floor;
  Matrix v(1, 1);
  v(0, 0) = std::log(clamped ? floor : raw);
  const int out = t.add_node(std::move(v), t.requires_grad(vid));
  t.set_backprop(out, [out, vid, index, raw, clamped](Tape& tp) {
    if (clamped) return;  // derivative of log(floor) w.r.t. the input is 0
    Matrix g = Matrix::Zero(tp.value_of(vid).rows(), 1);
    g(index, 0) = tp.grad_slot(out)(0, 0) / raw;
    tp.accumulate(vid, g);
  });
  return t.make_var(out);
}

Var sum(const std::vector<Var>& terms) {
  if (terms.empty()) throw std::invalid_argument("sum: empty term list");
  Var acc = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) acc = add(acc, terms[i]);
  return acc;
}

std::vector<double> finite_diff_gradient(const std::function<double()>& loss_fn,
                                         const std::vector<Parameter*>& params, double epsilon) {
  if (epsilon <= 0.0) throw std::invalid_argument("finite_diff_gradient: epsilon must be > 0");
  std::vector<double> grad;
  for (Parameter* p : params) {
    double* data = p->value.data();
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      const double saved = data[i];
      data[i] = saved + epsilon;
      const double up = loss_fn();
      data[i] = saved - epsilon;
      const double down = loss_fn();
      data[i] = saved;
      grad.push_back((up - down) / (2.0 * epsilon));
    }
  }
  return grad;
}

std::vector<double> flatten_gradients(const std::vector<Parameter*>& params) {
  std::vector<double> grad;
  for (const Parameter* p : params) {
    const double* data = p->grad.data();
    for (Eigen::Index i = 0; i < p->grad.size(); ++i) grad.push_back(data[i]);
  }
  return grad;
}

}  // namespace rlsum::ad
