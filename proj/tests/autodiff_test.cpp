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
#include <vector>

#include "doctest.h"
#include "rlsum/errors.hpp"
#include "rlsum/rng.hpp"

using namespace rlsum;
namespace ad = rlsum::ad;

namespace {

ad::Matrix random_matrix(int rows, int cols, Rng& rng) {
  ad::Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  }
  return m;
}

double max_rel_error(const std::vector<double>& analytic, const std::vector<double>& numeric) {
  REQUIRE(analytic.size() == numeric.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-8});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

}  // namespace

TEST_CASE("autodiff: constants carry values and no gradient") {
  ad::Tape tape;
  const ad::Var c = tape.scalar_constant(2.5);
  CHECK(c.scalar() == 2.5);
  CHECK_FALSE(tape.requires_grad(c.id()));
}

TEST_CASE("autodiff: add and matmul forward values") {
  ad::Tape tape;
  ad::Matrix a(2, 2), b(2, 2);
  a << 1, 2, 3, 4;
  b << 5, 6, 7, 8;
  const ad::Var va = tape.constant(a);
  const ad::Var vb = tape.constant(b);
  CHECK((va + vb).value() == (a + b));
  CHECK(ad::matmul(va, vb).value() == (a * b));
  CHECK(ad::cwise_mul(va, vb).value() == a.cwiseProduct(b).eval());
  CHECK(ad::affine(va, 2.0, 1.0).value() == (2.0 * a.array() + 1.0).matrix().eval());
}

TEST_CASE("autodiff: composite network gradient matches finite differences") {
  Rng rng(31);
  ad::Parameter w("w", random_matrix(3, 2, rng));
  ad::Parameter b("b", random_matrix(3, 1, rng));
  ad::Parameter u("u", random_matrix(1, 3, rng));
  const ad::Matrix x = random_matrix(2, 1, rng);
  const std::vector<ad::Parameter*> params = {&w, &b, &u};

  auto loss_fn = [&]() {
    ad::Tape tape;
    const ad::Var h = ad::tanh(ad::matmul(tape.leaf(w), tape.constant(x)) + tape.leaf(b));
    const ad::Var s = ad::sigmoid(ad::matmul(tape.leaf(u), h));
    return ad::log_pick(s, 0, 1e-12).scalar() * -1.0;
  };

  {
    ad::Tape tape;
    const ad::Var h = ad::tanh(ad::matmul(tape.leaf(w), tape.constant(x)) + tape.leaf(b));
    const ad::Var s = ad::sigmoid(ad::matmul(tape.leaf(u), h));
    const ad::Var loss = ad::log_pick(s, 0, 1e-12) * -1.0;
    tape.backward(loss);
  }
  const std::vector<double> analytic = ad::flatten_gradients(params);
  const std::vector<double> numeric = ad::finite_diff_gradient(loss_fn, params, 1e-5);
  CHECK(max_rel_error(analytic, numeric) < 1e-5);
}

TEST_CASE("autodiff: softmax columns sum to one and backprop matches finite differences") {
  Rng rng(37);
  ad::Parameter logits("logits", random_matrix(5, 1, rng));
  const std::vector<ad::Parameter*> params = {&logits};

  {
    ad::Tape tape;
    const ad::Var p = ad::softmax(tape.leaf(logits));
    CHECK(p.value().sum() == doctest::Approx(1.0).epsilon(1e-12));
  }

  auto loss_fn = [&]() {
    ad::Tape tape;
    const ad::Var p = ad::softmax(tape.leaf(logits));
    return ad::log_pick(p, 2, 1e-12).scalar() * -1.0;
  };
  {
    ad::Tape tape;
    const ad::Var p = ad::softmax(tape.leaf(logits));
    tape.backward(ad::log_pick(p, 2, 1e-12) * -1.0);
  }
  CHECK(max_rel_error(ad::flatten_gradients(params),
                      ad::finite_diff_gradient(loss_fn, params, 1e-5)) < 1e-5);
}

TEST_CASE("autodiff: softmax is shift-invariant and stable at large logits") {
  ad::Tape tape;
  ad::Matrix big(3, 1);
  big << 1000.0, 1001.0, 999.0;
  const ad::Var p = ad::softmax(tape.constant(big));
  CHECK(p.value().sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::isfinite(p.value()(0)));
  ad::Matrix shifted = big.array() - 1000.0;
  ad::Tape tape2;
  const ad::Var q = ad::softmax(tape2.constant(shifted));
  CHECK((p.value() - q.value()).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("autodiff: embed_row selects a row and routes gradient back to it") {
  Rng rng(41);
  ad::Parameter table("table", random_matrix(4, 3, rng));
  ad::Tape tape;
  const ad::Var row = ad::embed_row(tape.leaf(table), 2);
  REQUIRE(row.value().rows() == 3);
  REQUIRE(row.value().cols() == 1);
  CHECK(row.value().transpose() == table.value.row(2));
  tape.backward(ad::sum({log_pick(ad::sigmoid(row), 1, 1e-12)}));
  CHECK(table.grad.row(0).norm() == 0.0);
  CHECK(table.grad.row(1).norm() == 0.0);
  CHECK(table.grad.row(2).norm() > 0.0);
  CHECK(table.grad.row(3).norm() == 0.0);
}

TEST_CASE("autodiff: log_pick clamps at the floor with zero gradient") {
  ad::Parameter p("p", ad::Matrix::Zero(2, 1));
  p.value << 1e-30, 1.0;
  ad::Tape tape;
  const ad::Var v = ad::log_pick(tape.leaf(p), 0, 1e-12);
  CHECK(v.scalar() == doctest::Approx(std::log(1e-12)));
  tape.backward(v);
  CHECK(p.grad(0, 0) == 0.0);  // flat region below the floor
  CHECK(p.has_grad);
}

TEST_CASE("autodiff: div and exp on scalars") {
  ad::Parameter a("a", ad::Matrix::Constant(1, 1, 2.0));
  ad::Parameter b("b", ad::Matrix::Constant(1, 1, 4.0));
  const std::vector<ad::Parameter*> params = {&a, &b};
  auto loss_fn = [&]() {
    ad::Tape tape;
    return ad::div(ad::exp(tape.leaf(a)), tape.leaf(b)).scalar();
  };
  {
    ad::Tape tape;
    tape.backward(ad::div(ad::exp(tape.leaf(a)), tape.leaf(b)));
  }
  CHECK(max_rel_error(ad::flatten_gradients(params),
                      ad::finite_diff_gradient(loss_fn, params, 1e-6)) < 1e-5);
}

TEST_CASE("autodiff: sum folds a list of scalars") {
  ad::Tape tape;
  const ad::Var s = ad::sum({tape.scalar_constant(1.0), tape.scalar_constant(2.0),
                             tape.scalar_constant(3.5)});
  CHECK(s.scalar() == doctest::Approx(6.5));
  CHECK_THROWS_AS(ad::sum({}), std::invalid_argument);
}

TEST_CASE("autodiff: backward misuse is rejected") {
  ad::Parameter p("p", ad::Matrix::Constant(1, 1, 1.0));
  {
    ad::Tape tape;
    const ad::Var v = tape.leaf(p);
    tape.backward(v);
    CHECK_THROWS_AS(tape.backward(v), StateError);  // second sweep
  }
  {
    ad::Tape tape;
    const ad::Var m = tape.constant(ad::Matrix::Zero(2, 2));
    CHECK_THROWS_AS(tape.backward(m), std::invalid_argument);  // non-scalar loss
  }
  {
    ad::Tape tape;
    CHECK_THROWS_AS(tape.backward(ad::Var()), StateError);  // detached handle
  }
  {
    ad::Tape grad_off(false);
    const ad::Var v = grad_off.leaf(p);
    CHECK_FALSE(grad_off.requires_grad(v.id()));
    CHECK_THROWS_AS(grad_off.backward(v), StateError);
  }
}

TEST_CASE("autodiff: leaves flush gradients and mark has_grad even when loss is flat") {
  ad::Parameter p("p", ad::Matrix::Constant(2, 1, 0.5));
  p.has_grad = false;
  ad::Tape tape;
  const ad::Var leaf = tape.leaf(p);
  (void)leaf;
  tape.backward(tape.scalar_constant(3.0));  // constant loss: zero gradient everywhere
  CHECK(p.has_grad);
  CHECK(p.grad.norm() == 0.0);
}

TEST_CASE("autodiff: repeated leases of one parameter accumulate") {
  ad::Parameter p("p", ad::Matrix::Constant(1, 1, 0.25));
  ad::Tape tape;
  const ad::Var a = tape.leaf(p);
  const ad::Var b = tape.leaf(p);
  tape.backward(a + b);  // d/dp (p + p) = 2
  CHECK(p.grad(0, 0) == doctest::Approx(2.0));
}
