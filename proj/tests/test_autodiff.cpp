#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>

#include "playkit/autodiff.hpp"
#include "playkit/nets.hpp"
#include "playkit/rng.hpp"

using namespace playkit;

namespace {

using T = Tape<double>;
using V = T::Var;
using M = Mat<double>;

M random_mat(int r, int c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  M m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = rng.uniform(lo, hi);
  return m;
}

// Central finite differences against the tape gradient, on every entry.
double max_rel_error(const std::function<V(T&, V)>& build, const M& x0,
                     double h = 1e-6) {
  T tape;
  V x = tape.leaf(x0, 0);
  V loss = build(tape, x);
  tape.backward(loss);
  const M grad = tape.grad(x);

  auto eval = [&](const M& xv) {
    T t2;
    V v = t2.leaf(xv, 0);
    return t2.value(build(t2, v))(0, 0);
  };

  double worst = 0.0;
  for (int c = 0; c < x0.cols(); ++c)
    for (int r = 0; r < x0.rows(); ++r) {
      M hi = x0, lo = x0;
      hi(r, c) += h;
      lo(r, c) -= h;
      const double fd = (eval(hi) - eval(lo)) / (2.0 * h);
      const double g = grad(r, c);
      const double rel =
          std::abs(fd - g) / std::max({std::abs(fd), std::abs(g), 1e-8});
      worst = std::max(worst, rel);
    }
  return worst;
}

}  // namespace

TEST_CASE("elementwise op gradients match finite differences") {
  Rng rng(1);
  const M x = random_mat(4, 3, rng, 0.2, 1.5);  // positive for log
  const M r = random_mat(4, 3, rng);

  auto weighted = [&](auto op) {
    return [op, &r](T& t, V v) { return t.sum(t.mul(op(t, v), t.constant(r))); };
  };

  CHECK(max_rel_error(weighted([](T& t, V v) { return t.tanh(v); }), x) < 1e-6);
  CHECK(max_rel_error(weighted([](T& t, V v) { return t.sigmoid(v); }), x) < 1e-6);
  CHECK(max_rel_error(weighted([](T& t, V v) { return t.softplus(v); }), x) < 1e-6);
  CHECK(max_rel_error(weighted([](T& t, V v) { return t.exp(v); }), x) < 1e-6);
  CHECK(max_rel_error(weighted([](T& t, V v) { return t.log(v); }), x) < 1e-6);
  CHECK(max_rel_error(weighted([](T& t, V v) { return t.square(v); }), x) < 1e-6);
  CHECK(max_rel_error(weighted([](T& t, V v) { return t.cmul(v, 2.5); }), x) < 1e-6);
  CHECK(max_rel_error(weighted([](T& t, V v) { return t.cadd(v, -0.7); }), x) < 1e-6);
  CHECK(max_rel_error(weighted([](T& t, V v) { return t.neg(v); }), x) < 1e-6);
}

TEST_CASE("binary op gradients match finite differences") {
  Rng rng(2);
  const M x = random_mat(3, 4, rng, 0.3, 1.3);
  const M other = random_mat(3, 4, rng, 0.5, 1.5);
  const M r = random_mat(3, 4, rng);

  auto with_const = [&](auto op) {
    return [op, &other, &r](T& t, V v) {
      return t.sum(t.mul(op(t, v, t.constant(other)), t.constant(r)));
    };
  };
  CHECK(max_rel_error(with_const([](T& t, V a, V b) { return t.add(a, b); }), x) < 1e-6);
  CHECK(max_rel_error(with_const([](T& t, V a, V b) { return t.sub(a, b); }), x) < 1e-6);
  CHECK(max_rel_error(with_const([](T& t, V a, V b) { return t.mul(a, b); }), x) < 1e-6);
  CHECK(max_rel_error(with_const([](T& t, V a, V b) { return t.div(a, b); }), x) < 1e-6);
  // Second operand of div.
  CHECK(max_rel_error(
            [&](T& t, V v) {
              return t.sum(t.mul(t.div(t.constant(other), v), t.constant(r)));
            },
            x) < 1e-6);
}

TEST_CASE("matmul and broadcast gradients match finite differences") {
  Rng rng(3);
  const M w = random_mat(5, 3, rng);
  const M x = random_mat(3, 4, rng);
  const M bias = random_mat(5, 1, rng);
  const M r = random_mat(5, 4, rng);

  // d/dW sum(r .* (W x + b))
  CHECK(max_rel_error(
            [&](T& t, V v) {
              return t.sum(t.mul(
                  t.add_colvec(t.matmul(v, t.constant(x)), t.constant(bias)),
                  t.constant(r)));
            },
            w) < 1e-6);
  // d/dx
  CHECK(max_rel_error(
            [&](T& t, V v) {
              return t.sum(t.mul(
                  t.add_colvec(t.matmul(t.constant(w), v), t.constant(bias)),
                  t.constant(r)));
            },
            x) < 1e-6);
  // d/db
  CHECK(max_rel_error(
            [&](T& t, V v) {
              return t.sum(t.mul(
                  t.add_colvec(t.matmul(t.constant(w), t.constant(x)), v),
                  t.constant(r)));
            },
            bias) < 1e-6);
}

TEST_CASE("shape and reduction op gradients match finite differences") {
  Rng rng(4);
  const M x = random_mat(4, 3, rng);
  const M y = random_mat(2, 3, rng);
  const M r6 = random_mat(6, 3, rng);
  const M r2 = random_mat(2, 3, rng);
  const M r1 = random_mat(1, 3, rng);

  CHECK(max_rel_error(
            [&](T& t, V v) {
              return t.sum(t.mul(t.vcat(v, t.constant(y)), t.constant(r6)));
            },
            x) < 1e-6);
  CHECK(max_rel_error(
            [&](T& t, V v) {
              return t.sum(t.mul(t.rows(v, 1, 2), t.constant(r2)));
            },
            x) < 1e-6);
  CHECK(max_rel_error(
            [&](T& t, V v) {
              return t.sum(t.mul(t.colwise_sum(v), t.constant(r1)));
            },
            x) < 1e-6);
  CHECK(max_rel_error([&](T& t, V v) { return t.mean(v); }, x) < 1e-6);
  // clamp_min away from the kink.
  CHECK(max_rel_error(
            [&](T& t, V v) {
              return t.sum(t.mul(t.clamp_min(v, -5.0), t.constant(r6.topRows(4))));
            },
            x) < 1e-6);
}

TEST_CASE("clamp_min blocks gradient below the floor") {
  T tape;
  M x(1, 2);
  x << -1.0, 1.0;
  V v = tape.leaf(x, 0);
  V loss = tape.sum(tape.clamp_min(v, 0.0));
  tape.backward(loss);
  CHECK(tape.grad(v)(0, 0) == 0.0);
  CHECK(tape.grad(v)(0, 1) == 1.0);
}

TEST_CASE("a composite MLP graph differentiates correctly") {
  Rng rng(5);
  ParamStore<double> ps;
  Mlp net = Mlp::create(ps, "test", {6, 5, 3}, rng, Act::Tanh, Act::Linear);
  const M input = random_mat(6, 4, rng);
  const M target = random_mat(3, 4, rng);

  Tape<double> tape;
  TapeCtx<double> ctx(tape, ps);
  auto pred = net.forward(ctx, ctx.constant(input));
  auto loss = ctx.mean(ctx.square(ctx.sub(pred, ctx.constant(target))));
  tape.backward(loss);
  auto grads = collect_grads(tape, ps.entries.size());

  auto eval = [&]() {
    Tape<double> t2;
    TapeCtx<double> c2(t2, ps);
    auto p = net.forward(c2, c2.constant(input));
    return t2.value(c2.mean(c2.square(c2.sub(p, c2.constant(target)))))(0, 0);
  };

  Rng pick(6);
  const double h = 1e-6;
  for (int trial = 0; trial < 30; ++trial) {
    const int slot = pick.uniform_int(static_cast<int>(ps.entries.size()));
    auto& w = ps.entries[slot].w;
    const int r = pick.uniform_int(static_cast<int>(w.rows()));
    const int c = pick.uniform_int(static_cast<int>(w.cols()));
    const double orig = w(r, c);
    w(r, c) = orig + h;
    const double hi = eval();
    w(r, c) = orig - h;
    const double lo = eval();
    w(r, c) = orig;
    const double fd = (hi - lo) / (2.0 * h);
    const double g = grads[slot](r, c);
    const double rel =
        std::abs(fd - g) / std::max({std::abs(fd), std::abs(g), 1e-8});
    CHECK(rel < 1e-6);
  }
}

TEST_CASE("backward requires a scalar loss") {
  T tape;
  V v = tape.leaf(M::Ones(2, 2), 0);
  V y = tape.square(v);
  CHECK_THROWS_AS(tape.backward(y), RuntimeError);
}

TEST_CASE("gru cell forward matches between plain and tape contexts") {
  Rng rng(7);
  ParamStore<double> ps;
  GruCell cell = GruCell::create(ps, "gru", 5, 3, rng);
  const M h = random_mat(5, 2, rng);
  const M x = random_mat(3, 2, rng);

  PlainCtx<double> plain(ps);
  const M eager = cell.forward(plain, h, x);

  Tape<double> tape;
  TapeCtx<double> ctx(tape, ps);
  auto taped = cell.forward(ctx, ctx.constant(h), ctx.constant(x));
  CHECK((eager - tape.value(taped)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("adam descends a simple quadratic") {
  ParamStore<double> ps;
  Rng rng(8);
  const int slot = ps.add("w", 3, 1, rng);
  Adam<double> opt(AdamConfig{.lr = 0.05});
  for (int i = 0; i < 400; ++i) {
    Tape<double> tape;
    TapeCtx<double> ctx(tape, ps);
    auto w = ctx.param(slot);
    auto loss = ctx.sum(ctx.square(ctx.cadd(w, -2.0)));
    tape.backward(loss);
    auto grads = collect_grads(tape, ps.entries.size());
    opt.step(ps, grads);
  }
  CHECK((ps.entries[slot].w.array() - 2.0).abs().maxCoeff() < 1e-2);
}
