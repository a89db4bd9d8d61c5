#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "playkit/autodiff.hpp"
#include "playkit/rng.hpp"
#include "playkit/types.hpp"

namespace playkit {

// Named dense parameters plus Adam moments. Slots are stable indices used by
// both evaluation contexts below.
template <typename S>
struct ParamStore {
  struct Entry {
    std::string name;
    Mat<S> w;
    Mat<S> m;
    Mat<S> v;
  };
  std::vector<Entry> entries;

  int add(const std::string& name, int rows, int cols, Rng& rng) {
    // Glorot uniform.
    const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Mat<S> w(rows, cols);
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r)
        w(r, c) = static_cast<S>(rng.uniform(-a, a));
    return push(name, std::move(w));
  }

  int add_zeros(const std::string& name, int rows, int cols) {
    return push(name, Mat<S>::Zero(rows, cols));
  }

  size_t scalar_count() const {
    size_t n = 0;
    for (const auto& e : entries) n += static_cast<size_t>(e.w.size());
    return n;
  }

  bool all_finite() const {
    for (const auto& e : entries)
      if (!e.w.allFinite()) return false;
    return true;
  }

 private:
  int push(const std::string& name, Mat<S> w) {
    Entry e;
    e.name = name;
    e.m = Mat<S>::Zero(w.rows(), w.cols());
    e.v = Mat<S>::Zero(w.rows(), w.cols());
    e.w = std::move(w);
    entries.push_back(std::move(e));
    return static_cast<int>(entries.size()) - 1;
  }
};

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 100.0;
};

// One Adam step over the slots that received gradients (empty Mat = no grad).
template <typename S>
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  void step(ParamStore<S>& ps, std::vector<Mat<S>>& grads) {
    ++t_;
    double norm2 = 0.0;
    for (const auto& g : grads)
      if (g.size() > 0) norm2 += static_cast<double>(g.squaredNorm());
    const double norm = std::sqrt(norm2);
    const double scale =
        (cfg_.clip_norm > 0.0 && norm > cfg_.clip_norm) ? cfg_.clip_norm / norm
                                                        : 1.0;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (size_t i = 0; i < grads.size(); ++i) {
      if (grads[i].size() == 0) continue;
      auto& e = ps.entries[i];
      const Mat<S> g = grads[i] * static_cast<S>(scale);
      e.m = static_cast<S>(cfg_.beta1) * e.m + static_cast<S>(1.0 - cfg_.beta1) * g;
      e.v = static_cast<S>(cfg_.beta2) * e.v +
            static_cast<S>(1.0 - cfg_.beta2) * g.cwiseProduct(g);
      const Mat<S> mh = e.m / static_cast<S>(bc1);
      const Mat<S> vh = e.v / static_cast<S>(bc2);
      e.w -= (static_cast<S>(cfg_.lr) * mh.array() /
              (vh.array().sqrt() + static_cast<S>(cfg_.eps)))
                 .matrix();
    }
  }

  long steps() const { return t_; }

 private:
  AdamConfig cfg_;
  long t_ = 0;
};

// Gradients per slot after tape.backward().
template <typename S>
std::vector<Mat<S>> collect_grads(const Tape<S>& tape, size_t n_slots) {
  std::vector<Mat<S>> grads(n_slots);
  for (size_t i = 0; i < n_slots; ++i) {
    const Mat<S>* g = tape.slot_grad(static_cast<int>(i));
    if (g != nullptr) grads[i] = *g;
  }
  return grads;
}

// ---------------------------------------------------------------------------
// Evaluation contexts. Network cells are written once against this interface
// and run either eagerly (PlainCtx) or onto a tape (TapeCtx).

template <typename S>
struct PlainCtx {
  using V = Mat<S>;
  const ParamStore<S>& ps;

  explicit PlainCtx(const ParamStore<S>& p) : ps(p) {}

  V constant(const Mat<S>& m) const { return m; }
  V affine(int w, int b, const V& x) const {
    V out = ps.entries[w].w * x;
    out.colwise() += ps.entries[b].w.col(0);
    return out;
  }
  V matmul_param(int w, const V& x) const { return ps.entries[w].w * x; }
  V add(const V& a, const V& b) const { return a + b; }
  V sub(const V& a, const V& b) const { return a - b; }
  V mul(const V& a, const V& b) const { return a.cwiseProduct(b); }
  V div(const V& a, const V& b) const { return a.cwiseQuotient(b); }
  V cmul(const V& a, S c) const { return a * c; }
  V cadd(const V& a, S c) const { return (a.array() + c).matrix(); }
  V tanh(const V& a) const { return a.array().tanh().matrix(); }
  V sigmoid(const V& a) const {
    return a.unaryExpr([](S x) { return Tape<S>::sigmoid_scalar(x); });
  }
  V softplus(const V& a) const {
    return a.unaryExpr([](S x) { return Tape<S>::softplus_scalar(x); });
  }
  V exp(const V& a) const { return a.array().exp().matrix(); }
  V log(const V& a) const { return a.array().log().matrix(); }
  V square(const V& a) const { return a.array().square().matrix(); }
  V clamp_min(const V& a, S c) const { return a.cwiseMax(c); }
  V vcat(const V& a, const V& b) const {
    V out(a.rows() + b.rows(), a.cols());
    out.topRows(a.rows()) = a;
    out.bottomRows(b.rows()) = b;
    return out;
  }
  V rows(const V& a, int r0, int n) const { return a.middleRows(r0, n); }
  V sum(const V& a) const {
    V out(1, 1);
    out(0, 0) = a.sum();
    return out;
  }
  V mean(const V& a) const {
    V out(1, 1);
    out(0, 0) = a.sum() / static_cast<S>(a.size());
    return out;
  }
  V colwise_sum(const V& a) const { return a.colwise().sum(); }
  const Mat<S>& value(const V& v) const { return v; }
};

template <typename S>
struct TapeCtx {
  using V = typename Tape<S>::Var;
  Tape<S>& tape;
  const ParamStore<S>& ps;
  std::vector<V> slot_cache;

  TapeCtx(Tape<S>& t, const ParamStore<S>& p)
      : tape(t), ps(p), slot_cache(p.entries.size()) {}

  V param(int slot) {
    if (!slot_cache[slot].valid())
      slot_cache[slot] = tape.leaf(ps.entries[slot].w, slot);
    return slot_cache[slot];
  }
  V constant(const Mat<S>& m) { return tape.constant(m); }
  V affine(int w, int b, V x) {
    return tape.add_colvec(tape.matmul(param(w), x), param(b));
  }
  V matmul_param(int w, V x) { return tape.matmul(param(w), x); }
  V add(V a, V b) { return tape.add(a, b); }
  V sub(V a, V b) { return tape.sub(a, b); }
  V mul(V a, V b) { return tape.mul(a, b); }
  V div(V a, V b) { return tape.div(a, b); }
  V cmul(V a, S c) { return tape.cmul(a, c); }
  V cadd(V a, S c) { return tape.cadd(a, c); }
  V tanh(V a) { return tape.tanh(a); }
  V sigmoid(V a) { return tape.sigmoid(a); }
  V softplus(V a) { return tape.softplus(a); }
  V exp(V a) { return tape.exp(a); }
  V log(V a) { return tape.log(a); }
  V square(V a) { return tape.square(a); }
  V clamp_min(V a, S c) { return tape.clamp_min(a, c); }
  V vcat(V a, V b) { return tape.vcat(a, b); }
  V rows(V a, int r0, int n) { return tape.rows(a, r0, n); }
  V sum(V a) { return tape.sum(a); }
  V mean(V a) { return tape.mean(a); }
  V colwise_sum(V a) { return tape.colwise_sum(a); }
  const Mat<S>& value(V v) const { return tape.value(v); }
};

// ---------------------------------------------------------------------------
// Network building blocks (scalar-independent: they only hold slot indices).

enum class Act { Linear, Tanh, Sigmoid };

template <typename Ctx>
typename Ctx::V apply_act(Ctx& ctx, typename Ctx::V x, Act act) {
  switch (act) {
    case Act::Tanh: return ctx.tanh(x);
    case Act::Sigmoid: return ctx.sigmoid(x);
    case Act::Linear: break;
  }
  return x;
}

struct Mlp {
  std::vector<std::pair<int, int>> layers;  // (W, b) slots
  Act hidden = Act::Tanh;
  Act out = Act::Linear;

  template <typename S>
  static Mlp create(ParamStore<S>& ps, const std::string& prefix,
                    const std::vector<int>& dims, Rng& rng,
                    Act hidden = Act::Tanh, Act out = Act::Linear) {
    Mlp net;
    net.hidden = hidden;
    net.out = out;
    for (size_t i = 0; i + 1 < dims.size(); ++i) {
      const std::string nm = prefix + ".l" + std::to_string(i);
      const int w = ps.add(nm + ".w", dims[i + 1], dims[i], rng);
      const int b = ps.add_zeros(nm + ".b", dims[i + 1], 1);
      net.layers.emplace_back(w, b);
    }
    return net;
  }

  template <typename Ctx>
  typename Ctx::V forward(Ctx& ctx, typename Ctx::V x) const {
    for (size_t i = 0; i < layers.size(); ++i) {
      x = ctx.affine(layers[i].first, layers[i].second, x);
      x = apply_act(ctx, x, i + 1 == layers.size() ? out : hidden);
    }
    return x;
  }
};

struct GruCell {
  int wr = -1, br = -1, wu = -1, bu = -1, wc = -1, bc = -1;

  template <typename S>
  static GruCell create(ParamStore<S>& ps, const std::string& prefix,
                        int state_dim, int input_dim, Rng& rng) {
    GruCell cell;
    cell.wr = ps.add(prefix + ".wr", state_dim, state_dim + input_dim, rng);
    cell.br = ps.add_zeros(prefix + ".br", state_dim, 1);
    cell.wu = ps.add(prefix + ".wu", state_dim, state_dim + input_dim, rng);
    cell.bu = ps.add_zeros(prefix + ".bu", state_dim, 1);
    cell.wc = ps.add(prefix + ".wc", state_dim, state_dim + input_dim, rng);
    cell.bc = ps.add_zeros(prefix + ".bc", state_dim, 1);
    return cell;
  }

  template <typename Ctx>
  typename Ctx::V forward(Ctx& ctx, typename Ctx::V h,
                          typename Ctx::V x) const {
    using S = std::decay_t<decltype(ctx.value(h)(0, 0))>;
    auto hx = ctx.vcat(h, x);
    auto r = ctx.sigmoid(ctx.affine(wr, br, hx));
    auto u = ctx.sigmoid(ctx.affine(wu, bu, hx));
    auto rhx = ctx.vcat(ctx.mul(r, h), x);
    auto cand = ctx.tanh(ctx.affine(wc, bc, rhx));
    auto keep = ctx.mul(u, h);
    auto one_minus_u = ctx.cadd(ctx.cmul(u, S(-1)), S(1));
    return ctx.add(keep, ctx.mul(one_minus_u, cand));
  }
};

}  // namespace playkit
