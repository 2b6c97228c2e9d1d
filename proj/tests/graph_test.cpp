#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <functional>
#include <limits>

#include "ace/errors.hpp"
#include "ace/graph.hpp"
#include "support/test_util.hpp"

using namespace ace;
using namespace ace::graph;
using ace::testing::bitwise_equal;
using ace::testing::random_array;
using ace::testing::random_array_nonzero;
using ace::testing::random_simplex_rows;

namespace {

// Scalar wrapper f = sum(out * R) with a fixed random weighting R, so the
// adjoint reaching the op under test is non-uniform.
Var weighted_sum(Tape& t, Var out, const Array& weights) {
  return sum(mul(out, t.input(weights)));
}

}  // namespace

TEST_CASE("matmul forward examples") {
  Tape t;
  Var i2 = t.input(Array::matrix(2, 2, {1, 0, 0, 1}));
  Var m = t.input(Array::matrix(2, 2, {1, 2, 3, 4}));
  Var p = matmul(i2, m);
  CHECK(p.value().at(0, 0) == 1.0);
  CHECK(p.value().at(0, 1) == 2.0);
  CHECK(p.value().at(1, 0) == 3.0);
  CHECK(p.value().at(1, 1) == 4.0);

  Var a = t.input(Array::matrix(1, 2, {1, 0}));
  Var b = t.input(Array::matrix(2, 1, {2, 3}));
  CHECK(matmul(a, b).value()[0] == 2.0);

  CHECK_THROWS_AS(matmul(m, b), DimensionError);
}

TEST_CASE("matmul gradients match finite differences") {
  Rng rng(11);
  Parameter a("a", random_array({3, 4}, rng));
  Parameter b("b", random_array({4, 2}, rng));
  Array w = random_array({3, 2}, rng);
  Parameter* params[] = {&a, &b};
  double err = check_gradients(
      [&](Tape& t) { return weighted_sum(t, matmul(t.param(a), t.param(b)), w); }, params);
  CHECK(err < 1e-6);
}

TEST_CASE("elementwise forward examples") {
  Tape t;
  Var r = relu(t.input(Array::vector({-1, 0, 2})));
  CHECK(r.value()[0] == 0.0);
  CHECK(r.value()[1] == 0.0);
  CHECK(r.value()[2] == 2.0);

  Var s = add(t.input(Array::vector({1, 2})), t.input(Array::vector({3, 4})));
  CHECK(s.value()[0] == 4.0);
  CHECK(s.value()[1] == 6.0);

  CHECK_THROWS_AS(add(t.input(Array::vector({1, 2})), t.input(Array::vector({1, 2, 3}))),
                  DimensionError);
}

TEST_CASE("mul gradient check on random 2x3 arrays") {
  Rng rng(12);
  Parameter a("a", random_array({2, 3}, rng));
  Parameter b("b", random_array({2, 3}, rng));
  Array w = random_array({2, 3}, rng);
  Parameter* params[] = {&a, &b};
  double err = check_gradients(
      [&](Tape& t) { return weighted_sum(t, mul(t.param(a), t.param(b)), w); }, params);
  CHECK(err < 1e-6);
}

TEST_CASE("reduce forward examples") {
  Tape t;
  CHECK(sum_squares(t.input(Array::vector({1, 2, -2}))).value()[0] == 9.0);
  CHECK(sum_squares(t.input(Array::vector({0, 0, 0}))).value()[0] == 0.0);
  CHECK(sum(t.input(Array::matrix(2, 2, {1, 2, 3, 4}))).value()[0] == 10.0);
  Var col = sum(t.input(Array::matrix(2, 2, {1, 2, 3, 4})), 0);
  CHECK(col.value()[0] == 4.0);
  CHECK(col.value()[1] == 6.0);
  CHECK_THROWS_AS(sum(t.input(Array::matrix(2, 2, {1, 2, 3, 4})), 2), DimensionError);
}

TEST_CASE("mean gradient check on random vector") {
  Rng rng(13);
  Parameter a("a", random_array({7}, rng));
  Parameter* params[] = {&a};
  double err = check_gradients([&](Tape& t) { return mean(t.param(a)); }, params);
  CHECK(err < 1e-6);
}

TEST_CASE("softmax cross-entropy examples") {
  Tape t;
  // Uniform logits over C=4: loss is ln 4 for any one-hot target.
  Var z = t.input(Array::matrix(1, 4, {0.7, 0.7, 0.7, 0.7}));
  Var y = t.input(Array::matrix(1, 4, {0, 0, 1, 0}));
  CHECK(softmax_cross_entropy(z, y).value()[0] == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  // Saturated correct prediction.
  Var z2 = t.input(Array::matrix(1, 2, {10, -10}));
  Var y2 = t.input(Array::matrix(1, 2, {1, 0}));
  double loss = softmax_cross_entropy(z2, y2).value()[0];
  CHECK(loss == doctest::Approx(2.061153622438558e-9).epsilon(1e-6));

  // Target rows must sum to one.
  Var bad = t.input(Array::matrix(1, 2, {0.5, 0.6}));
  CHECK_THROWS_AS(softmax_cross_entropy(z2, bad), ContractError);
}

TEST_CASE("softmax cross-entropy gradient check on a 4x5 batch") {
  Rng rng(14);
  Parameter z("z", random_array({4, 5}, rng));
  Array targets = random_simplex_rows(4, 5, rng);
  Parameter* params[] = {&z};
  double err = check_gradients(
      [&](Tape& t) { return softmax_cross_entropy(t.param(z), t.input(targets)); }, params);
  CHECK(err < 1e-6);
}

TEST_CASE("stop_gradient is an identity forward and a barrier backward") {
  Tape t;
  Var x = t.input(Array::vector({1, 2}));
  Var sg = stop_gradient(x);
  CHECK(sg.value()[0] == 1.0);
  CHECK(sg.value()[1] == 2.0);

  Var loss = sum(sg);
  t.backward(loss);
  const Array& gx = t.adjoint(x);
  for (std::size_t i = 0; i < gx.size(); ++i) CHECK(gx[i] == 0.0);
}

TEST_CASE("composite x^2 + stop_gradient(x^2) has gradient 2x") {
  Rng rng(15);
  Parameter x("x", random_array({5}, rng));
  {
    Tape t;
    Var v = t.param(x);
    Var f = add(sum_squares(v), stop_gradient(sum_squares(v)));
    x.zero_grad();
    t.backward(f);
  }
  for (std::size_t i = 0; i < x.value.size(); ++i) {
    CHECK(x.gradient[i] == doctest::Approx(2.0 * x.value[i]).epsilon(1e-12));
  }

  // Finite differences applied to the differentiable branch alone agree.
  Parameter* params[] = {&x};
  double err =
      check_gradients([&](Tape& t) { return sum_squares(t.param(x)); }, params);
  CHECK(err < 1e-6);
}

TEST_CASE("check_gradients on linear and constant functions") {
  Rng rng(16);
  Parameter w("w", random_array({6}, rng));
  Parameter* params[] = {&w};
  CHECK(check_gradients([&](Tape& t) { return sum(t.param(w)); }, params) < 1e-9);

  Array fixed = random_array({3}, rng);
  CHECK(check_gradients([&](Tape& t) {
          (void)t.param(w);
          return sum(t.input(fixed));
        },
                        params) == 0.0);

  CHECK_THROWS_AS(check_gradients(
                      [&](Tape& t) {
                        return scale(sum(t.param(w)), std::numeric_limits<double>::infinity());
                      },
                      params),
                  ContractError);
}

TEST_CASE("every primitive passes finite-difference checks over 20 random trials") {
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(1000 + static_cast<std::uint64_t>(trial));
    Parameter a("a", random_array({3, 4}, rng));
    Parameter b("b", random_array({4, 3}, rng));
    Parameter c("c", random_array({3, 3}, rng));
    Parameter row("row", random_array({3}, rng));
    Parameter kinked("kinked", random_array_nonzero({3, 3}, rng));
    Array w33 = random_array({3, 3}, rng);
    Array w34 = random_array({3, 4}, rng);
    Array wrows = random_array({3, 4}, rng);
    Array targets = random_simplex_rows(3, 3, rng);
    Parameter* params[] = {&a, &b, &c, &row, &kinked};

    auto check = [&](const std::function<Var(Tape&)>& f) {
      CHECK(check_gradients(f, params) < 1e-5);
    };

    check([&](Tape& t) { return weighted_sum(t, matmul(t.param(a), t.param(b)), w33); });
    check([&](Tape& t) { return weighted_sum(t, add(t.param(c), t.param(row)), w33); });
    check([&](Tape& t) { return weighted_sum(t, sub(t.param(c), t.param(row)), w33); });
    check([&](Tape& t) { return weighted_sum(t, mul(t.param(c), t.param(row)), w33); });
    check([&](Tape& t) { return weighted_sum(t, relu(t.param(kinked)), w33); });
    check([&](Tape& t) { return weighted_sum(t, scale(t.param(a), -1.7), w34); });
    check([&](Tape& t) { return sum(t.param(a)); });
    check([&](Tape& t) { return weighted_sum(t, sum(t.param(a), 0), Array::vector({1, -2, 3, 0.5})); });
    check([&](Tape& t) { return weighted_sum(t, sum(t.param(a), 1), Array::vector({2, -1, 0.5})); });
    check([&](Tape& t) { return mean(t.param(a)); });
    check([&](Tape& t) { return weighted_sum(t, mean(t.param(a), 0), Array::vector({1, -2, 3, 0.5})); });
    check([&](Tape& t) { return sum_squares(t.param(a)); });
    check([&](Tape& t) { return weighted_sum(t, sum_squares(t.param(a), 1), Array::vector({2, -1, 0.5})); });
    check([&](Tape& t) { return softmax_cross_entropy(t.param(c), t.input(targets)); });
    check([&](Tape& t) {
      return add(sum_squares(t.param(c)), stop_gradient(sum(t.param(c))));
    });
    check([&](Tape& t) {
      return weighted_sum(t, take_rows(t.param(a), {2, 0, 2}), wrows);
    });
  }
}

TEST_CASE("backward through stop_gradient contributes bitwise zero upstream") {
  Rng rng(17);
  Parameter w("w", random_array({4, 4}, rng));
  w.zero_grad();
  Tape t;
  Var v = t.param(w);
  Var h = matmul(v, t.input(random_array({4, 4}, rng)));
  Var f = sum_squares(stop_gradient(h));
  t.backward(f);
  for (std::size_t i = 0; i < w.gradient.size(); ++i) {
    CHECK(w.gradient[i] == 0.0);
    CHECK(!std::signbit(w.gradient[i]));
  }
}

TEST_CASE("two identical forward/backward passes are bitwise identical") {
  Rng rng(18);
  Array x = random_array({4, 6}, rng);
  Array wv = random_array({6, 3}, rng);
  Array targets = random_simplex_rows(4, 3, rng);

  auto run = [&](Array& grad_out) {
    Parameter w("w", wv);
    Tape t;
    Var z = matmul(t.input(x), t.param(w));
    Var f = softmax_cross_entropy(relu(z), t.input(targets));
    t.backward(f);
    grad_out = w.gradient;
    return f.value()[0];
  };
  Array g1, g2;
  double f1 = run(g1);
  double f2 = run(g2);
  CHECK(std::memcmp(&f1, &f2, sizeof f1) == 0);
  CHECK(bitwise_equal(g1, g2));
}

TEST_CASE("forward and backward keep values finite on finite inputs") {
  Rng rng(19);
  for (int trial = 0; trial < 5; ++trial) {
    Parameter w("w", random_array({5, 5}, rng));
    Tape t;
    Var z = matmul(t.input(random_array({6, 5}, rng)), t.param(w));
    Var f = softmax_cross_entropy(scale(relu(z), 3.0), t.input(random_simplex_rows(6, 5, rng)));
    CHECK(f.value().all_finite());
    t.backward(f);
    CHECK(w.gradient.all_finite());
  }
}

TEST_CASE("gradient accumulates across backward calls until zeroed") {
  Parameter w("w", Array::vector({2.0, 3.0}));
  w.zero_grad();
  Tape t;
  Var v = t.param(w);
  Var f1 = sum(v);
  Var f2 = sum_squares(v);
  t.backward(f1);
  CHECK(w.gradient[0] == 1.0);
  t.backward(f2);
  CHECK(w.gradient[0] == 1.0 + 4.0);
  CHECK(w.gradient[1] == 1.0 + 6.0);
  w.zero_grad();
  CHECK(w.gradient[0] == 0.0);
  CHECK(w.gradient[1] == 0.0);
}
