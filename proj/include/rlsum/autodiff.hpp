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

#ifndef RLSUM_AUTODIFF_HPP_
#define RLSUM_AUTODIFF_HPP_

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "rlsum/errors.hpp"

namespace rlsum::ad {

using Matrix = Eigen::MatrixXd;

/// A trainable tensor that persists across computation graphs. Gradients
/// accumulate here when a Tape that leased the parameter runs backward().
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  bool has_grad = false;

  Parameter() = default;
  Parameter(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}

  void zero_grad() {
    grad.setZero();
    has_grad = false;
  }
};

class Tape;

/// Lightweight handle to a node on a Tape. Default-constructed handles are
/// detached; using them in ops or backward() raises StateError.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  /// Value of a 1x1 node.
  double scalar() const;
  /// Gradient accumulated during backward(); zero matrix if untouched.
  Matrix grad() const;

  bool attached() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Reverse-mode graph arena. One tape per training example step; nodes are
/// recorded in topological order during the forward pass and swept in reverse
/// by backward(). A tape constructed with grad_enabled=false records values
/// only (cheap validation-time forwards) and refuses backward().
class Tape {
 public:
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Non-differentiable node holding the given value.
  Var constant(Matrix value);
  Var scalar_constant(double value);

  /// Leases a parameter onto this tape; backward() flushes the node's
  /// gradient into the parameter's accumulator.
  Var leaf(Parameter& param);

  /// Seeds d(loss)/d(loss) = 1, sweeps the graph in reverse creation order,
  /// then flushes leaf gradients into their bound Parameters. May be called
  /// once per tape; a second call or a detached loss raises StateError.
  void backward(const Var& loss);

  bool grad_enabled() const { return grad_enabled_; }
  bool backward_done() const { return backward_done_; }
  std::size_t node_count() const { return nodes_.size(); }

  // Graph-construction plumbing used by the free-function ops. Ops create the
  // node first, then attach the closure that routes its gradient to parents.
  int add_node(Matrix value, bool requires_grad);
  void set_backprop(int id, std::function<void(Tape&)> backprop);
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  const Matrix& value_of(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  /// Lazily zero-initialized gradient slot for a node.
  Matrix& grad_slot(int id);
  bool grad_touched(int id) const { return nodes_[static_cast<std::size_t>(id)].grad_init; }
  /// Adds g into the node's gradient if the node participates in the sweep.
  void accumulate(int id, const Matrix& g);
  Var make_var(int id) { return Var(this, id); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool grad_init = false;
    bool requires_grad = false;
    std::function<void(Tape&)> backprop;
    Parameter* bound = nullptr;
  };

  std::vector<Node> nodes_;
  bool grad_enabled_;
  bool backward_done_ = false;
};

// ----- ops ---------------------------------------------------------------
// Free functions building one node each. Shapes are validated with
// std::invalid_argument; mixing tapes raises StateError.

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var cwise_mul(const Var& a, const Var& b);
Var matmul(const Var& a, const Var& b);
/// Elementwise scale*x + shift.
Var affine(const Var& x, double scale, double shift);
Var sigmoid(const Var& x);
Var tanh(const Var& x);
Var exp(const Var& x);
/// Scalar division a/b (both 1x1).
Var div(const Var& a, const Var& b);
/// Numerically stable softmax over a column vector.
Var softmax(const Var& logits);
/// Row `row` of a table, as a column vector.
Var embed_row(const Var& table, int row);
/// log(max(vec[index], floor)) as a scalar node; gradient is zero inside the
/// clamped region.
Var log_pick(const Var& vec, int index, double floor);
Var sum(const std::vector<Var>& terms);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& x, double s) { return affine(x, s, 0.0); }
inline Var operator*(double s, const Var& x) { return affine(x, s, 0.0); }

/// Central finite differences (L(t+e) - L(t-e)) / 2e per coordinate over the
/// given parameters, restoring values afterwards. loss_fn must be
/// deterministic while parameters are perturbed.
std::vector<double> finite_diff_gradient(const std::function<double()>& loss_fn,
                                         const std::vector<Parameter*>& params, double epsilon);

/// Flattened analytic gradient of the same parameters, for comparison against
/// finite_diff_gradient.
std::vector<double> flatten_gradients(const std::vector<Parameter*>& params);

}  // namespace rlsum::ad

#endif  // RLSUM_AUTODIFF_HPP_
