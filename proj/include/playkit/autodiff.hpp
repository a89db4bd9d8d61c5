#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "playkit/types.hpp"

namespace playkit {

// Reverse-mode automatic differentiation over dense Eigen matrices. A Tape
// records one forward computation; backward() accumulates gradients for every
// node. Batches are columns, so the whole graph stays matrix-shaped.
template <typename S>
class Tape {
 public:
  struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
  };

  Var constant(Mat<S> v) { return make(std::move(v), -1); }

  // Leaf bound to an external parameter slot; its gradient is retrievable by
  // slot after backward().
  Var leaf(const Mat<S>& v, int slot) { return make(v, slot); }

  const Mat<S>& value(Var v) const { return nodes_[v.id].value; }
  const Mat<S>& grad(Var v) const { return nodes_[v.id].grad; }

  size_t size() const { return nodes_.size(); }

  // ---- arithmetic -------------------------------------------------------

  Var add(Var a, Var b) {
    Var out = make(value(a) + value(b), -1);
    record(out, [a, b](Tape& t, int self) {
      t.nodes_[a.id].grad += t.nodes_[self].grad;
      t.nodes_[b.id].grad += t.nodes_[self].grad;
    });
    return out;
  }

  Var sub(Var a, Var b) {
    Var out = make(value(a) - value(b), -1);
    record(out, [a, b](Tape& t, int self) {
      t.nodes_[a.id].grad += t.nodes_[self].grad;
      t.nodes_[b.id].grad -= t.nodes_[self].grad;
    });
    return out;
  }

  Var mul(Var a, Var b) {  // elementwise
    Var out = make(value(a).cwiseProduct(value(b)), -1);
    record(out, [a, b](Tape& t, int self) {
      t.nodes_[a.id].grad +=
          t.nodes_[self].grad.cwiseProduct(t.nodes_[b.id].value);
      t.nodes_[b.id].grad +=
          t.nodes_[self].grad.cwiseProduct(t.nodes_[a.id].value);
    });
    return out;
  }

  Var div(Var a, Var b) {  // elementwise
    Var out = make(value(a).cwiseQuotient(value(b)), -1);
    record(out, [a, b](Tape& t, int self) {
      const Mat<S>& g = t.nodes_[self].grad;
      const Mat<S>& bv = t.nodes_[b.id].value;
      t.nodes_[a.id].grad += g.cwiseQuotient(bv);
      t.nodes_[b.id].grad -= g.cwiseProduct(t.nodes_[self].value).cwiseQuotient(bv);
    });
    return out;
  }

  Var matmul(Var a, Var b) {
    Var out = make(value(a) * value(b), -1);
    record(out, [a, b](Tape& t, int self) {
      t.nodes_[a.id].grad.noalias() +=
          t.nodes_[self].grad * t.nodes_[b.id].value.transpose();
      t.nodes_[b.id].grad.noalias() +=
          t.nodes_[a.id].value.transpose() * t.nodes_[self].grad;
    });
    return out;
  }

  // m + column vector broadcast over columns.
  Var add_colvec(Var m, Var v) {
    Mat<S> out = value(m);
    out.colwise() += value(v).col(0);
    Var o = make(std::move(out), -1);
    record(o, [m, v](Tape& t, int self) {
      t.nodes_[m.id].grad += t.nodes_[self].grad;
      t.nodes_[v.id].grad.col(0) += t.nodes_[self].grad.rowwise().sum();
    });
    return o;
  }

  Var cmul(Var a, S c) {
    Var out = make(value(a) * c, -1);
    record(out, [a, c](Tape& t, int self) {
      t.nodes_[a.id].grad += t.nodes_[self].grad * c;
    });
    return out;
  }

  Var cadd(Var a, S c) {
    Var out = make(Mat<S>(value(a).array() + c), -1);
    record(out, [a](Tape& t, int self) {
      t.nodes_[a.id].grad += t.nodes_[self].grad;
    });
    return out;
  }

  Var neg(Var a) { return cmul(a, S(-1)); }

  // ---- nonlinearities ----------------------------------------------------

  Var tanh(Var a) {
    Var out = make(Mat<S>(value(a).array().tanh()), -1);
    record(out, [a](Tape& t, int self) {
      const auto& y = t.nodes_[self].value.array();
      t.nodes_[a.id].grad.array() +=
          t.nodes_[self].grad.array() * (S(1) - y * y);
    });
    return out;
  }

  Var sigmoid(Var a) {
    Mat<S> y = value(a).unaryExpr([](S x) { return sigmoid_scalar(x); });
    Var out = make(std::move(y), -1);
    record(out, [a](Tape& t, int self) {
      const auto& y = t.nodes_[self].value.array();
      t.nodes_[a.id].grad.array() += t.nodes_[self].grad.array() * y * (S(1) - y);
    });
    return out;
  }

  Var softplus(Var a) {
    Mat<S> y = value(a).unaryExpr([](S x) { return softplus_scalar(x); });
    Var out = make(std::move(y), -1);
    record(out, [a](Tape& t, int self) {
      const auto& x = t.nodes_[a.id].value;
      t.nodes_[a.id].grad.array() +=
          t.nodes_[self].grad.array() *
          x.unaryExpr([](S v) { return sigmoid_scalar(v); }).array();
    });
    return out;
  }

  Var exp(Var a) {
    Var out = make(Mat<S>(value(a).array().exp()), -1);
    record(out, [a](Tape& t, int self) {
      t.nodes_[a.id].grad.array() +=
          t.nodes_[self].grad.array() * t.nodes_[self].value.array();
    });
    return out;
  }

  Var log(Var a) {
    Var out = make(Mat<S>(value(a).array().log()), -1);
    record(out, [a](Tape& t, int self) {
      t.nodes_[a.id].grad.array() +=
          t.nodes_[self].grad.array() / t.nodes_[a.id].value.array();
    });
    return out;
  }

  Var square(Var a) {
    Var out = make(Mat<S>(value(a).array().square()), -1);
    record(out, [a](Tape& t, int self) {
      t.nodes_[a.id].grad.array() += t.nodes_[self].grad.array() * S(2) *
                                     t.nodes_[a.id].value.array();
    });
    return out;
  }

  Var clamp_min(Var a, S c) {
    Var out = make(value(a).cwiseMax(c), -1);
    record(out, [a, c](Tape& t, int self) {
      const auto& x = t.nodes_[a.id].value.array();
      t.nodes_[a.id].grad.array() +=
          t.nodes_[self].grad.array() * (x > c).template cast<S>();
    });
    return out;
  }

  // ---- shape ops ---------------------------------------------------------

  Var vcat(Var a, Var b) {
    const Mat<S>& av = value(a);
    const Mat<S>& bv = value(b);
    Mat<S> out(av.rows() + bv.rows(), av.cols());
    out.topRows(av.rows()) = av;
    out.bottomRows(bv.rows()) = bv;
    Var o = make(std::move(out), -1);
    const int ar = static_cast<int>(av.rows());
    const int br = static_cast<int>(bv.rows());
    record(o, [a, b, ar, br](Tape& t, int self) {
      t.nodes_[a.id].grad += t.nodes_[self].grad.topRows(ar);
      t.nodes_[b.id].grad += t.nodes_[self].grad.bottomRows(br);
    });
    return o;
  }

  Var rows(Var a, int r0, int n) {
    Var out = make(value(a).middleRows(r0, n), -1);
    record(out, [a, r0, n](Tape& t, int self) {
      t.nodes_[a.id].grad.middleRows(r0, n) += t.nodes_[self].grad;
    });
    return out;
  }

  // ---- reductions --------------------------------------------------------

  Var sum(Var a) {
    Mat<S> out(1, 1);
    out(0, 0) = value(a).sum();
    Var o = make(std::move(out), -1);
    record(o, [a](Tape& t, int self) {
      t.nodes_[a.id].grad.array() += t.nodes_[self].grad(0, 0);
    });
    return o;
  }

  Var mean(Var a) {
    const S inv = S(1) / static_cast<S>(value(a).size());
    return cmul(sum(a), inv);
  }

  // Sum over rows, keeping columns: n x B -> 1 x B.
  Var colwise_sum(Var a) {
    Var out = make(value(a).colwise().sum(), -1);
    record(out, [a](Tape& t, int self) {
      t.nodes_[a.id].grad.rowwise() += t.nodes_[self].grad.row(0);
    });
    return out;
  }

  // ---- backward ----------------------------------------------------------

  void backward(Var loss) {
    for (auto& n : nodes_) n.grad = Mat<S>::Zero(n.value.rows(), n.value.cols());
    Mat<S>& lg = nodes_[loss.id].grad;
    if (lg.size() != 1)
      throw RuntimeError("backward() expects a scalar loss node");
    lg(0, 0) = S(1);
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i)
      if (nodes_[i].back) nodes_[i].back(*this, i);
  }

  // Gradient for a parameter slot, or nullptr when the slot never appeared.
  const Mat<S>* slot_grad(int slot) const {
    for (size_t i = 0; i < slot_index_.size(); ++i)
      if (slot_index_[i].first == slot) return &nodes_[slot_index_[i].second].grad;
    return nullptr;
  }

  static S sigmoid_scalar(S x) {
    if (x >= S(0)) return S(1) / (S(1) + std::exp(-x));
    const S e = std::exp(x);
    return e / (S(1) + e);
  }

  static S softplus_scalar(S x) {
    // max(x, 0) + log1p(exp(-|x|))
    return std::max(x, S(0)) + std::log1p(std::exp(-std::abs(x)));
  }

 private:
  struct Node {
    Mat<S> value;
    Mat<S> grad;
    int slot = -1;
    std::function<void(Tape&, int)> back;
  };

  Var make(Mat<S> v, int slot) {
    Node n;
    n.value = std::move(v);
    n.slot = slot;
    nodes_.push_back(std::move(n));
    const int id = static_cast<int>(nodes_.size()) - 1;
    if (slot >= 0) slot_index_.emplace_back(slot, id);
    return Var{id};
  }

  template <typename F>
  void record(Var v, F&& back) {
    nodes_[v.id].back = std::forward<F>(back);
  }

  std::vector<Node> nodes_;
  std::vector<std::pair<int, int>> slot_index_;
};

}  // namespace playkit
