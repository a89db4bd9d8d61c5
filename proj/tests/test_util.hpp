#pragma once

// Shared helpers for unit and acceptance tests.

#include <cmath>
#include <vector>

#include "playkit/rng.hpp"
#include "playkit/worldmodel.hpp"

namespace playkit::testutil {

template <typename S>
Mat<S> random_mat(int r, int c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Mat<S> m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = static_cast<S>(rng.uniform(lo, hi));
  return m;
}

template <typename S>
Mat<S> random_binary(int r, int c, Rng& rng, double p = 0.2) {
  Mat<S> m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = rng.bernoulli(p) ? S(1) : S(0);
  return m;
}

// Synthetic training batch: smooth-ish observations, sparse change labels.
template <typename S>
WmBatch<S> random_batch(const RssmDims& dims, int length, int batch, Rng& rng) {
  WmBatch<S> b;
  for (int t = 0; t < length; ++t) {
    b.obs.push_back(random_mat<S>(dims.obs, batch, rng, 0.0, 1.0));
    b.act.push_back(random_mat<S>(dims.action, batch, rng));
    b.change.push_back(random_binary<S>(dims.change, batch, rng, 0.1));
  }
  return b;
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  int points = 0;
};

// Central finite differences of the training loss against the tape gradient
// at `points` random parameter coordinates.
template <typename S>
GradCheckResult wm_gradient_check(WorldModel<S>& wm, const WmBatch<S>& batch,
                                  const WmTrainConfig& cfg, std::uint64_t seed,
                                  int points, Rng& pick, double h = 1e-5) {
  Tape<S> tape;
  auto loss = wm_build_loss(tape, wm, batch, cfg, seed);
  tape.backward(loss);
  auto grads = collect_grads(tape, wm.params.entries.size());

  auto eval = [&]() {
    Tape<S> t2;
    return static_cast<double>(
        t2.value(wm_build_loss(t2, wm, batch, cfg, seed))(0, 0));
  };

  GradCheckResult res;
  res.points = points;
  for (int i = 0; i < points; ++i) {
    const int slot = pick.uniform_int(static_cast<int>(wm.params.entries.size()));
    auto& w = wm.params.entries[slot].w;
    const int r = pick.uniform_int(static_cast<int>(w.rows()));
    const int c = pick.uniform_int(static_cast<int>(w.cols()));
    const S orig = w(r, c);
    w(r, c) = orig + static_cast<S>(h);
    const double hi = eval();
    w(r, c) = orig - static_cast<S>(h);
    const double lo = eval();
    w(r, c) = orig;
    const double fd = (hi - lo) / (2.0 * h);
    const double g =
        grads[slot].size() > 0 ? static_cast<double>(grads[slot](r, c)) : 0.0;
    const double rel =
        std::abs(fd - g) / std::max({std::abs(fd), std::abs(g), 1e-8});
    res.max_rel_error = std::max(res.max_rel_error, rel);
  }
  return res;
}

}  // namespace playkit::testutil
