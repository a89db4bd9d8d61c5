#pragma once

#include <string>
#include <vector>

#include "playkit/checkpoint.hpp"
#include "playkit/nets.hpp"
#include "playkit/rng.hpp"
#include "playkit/types.hpp"

namespace playkit {

enum class EnsembleLoss { Bernoulli, Gaussian };

struct EnsembleDims {
  int in = 1028;   // flattened change map + action
  int hidden = 48;
  int out = 1024;
  int members = 5;

  std::array<std::uint32_t, 8> as_array(EnsembleLoss loss) const {
    return {static_cast<std::uint32_t>(members), static_cast<std::uint32_t>(in),
            static_cast<std::uint32_t>(hidden), static_cast<std::uint32_t>(out),
            loss == EnsembleLoss::Bernoulli ? 0u : 1u, 0, 0, 0};
  }
};

struct EnsembleLosses {
  std::vector<double> member_nll;
  bool finite = true;
  std::string diagnostic;
};

// Ensemble of one-step predictors with identical architecture and independent
// initialization. Bernoulli members emit sigmoid probabilities; Gaussian
// members emit raw predictions trained with squared error. Each training step
// gives every member its own bootstrap resample of the batch.
template <typename S>
struct PredictorEnsemble {
  EnsembleDims dims;
  EnsembleLoss loss = EnsembleLoss::Bernoulli;
  std::uint64_t seed = 0;
  ParamStore<S> params;
  std::vector<Mlp> members;

  static PredictorEnsemble create(const EnsembleDims& dims, EnsembleLoss loss,
                                  std::uint64_t seed) {
    if (dims.members < 2)
      throw ConfigError("ensemble needs at least 2 members");
    PredictorEnsemble e;
    e.dims = dims;
    e.loss = loss;
    e.seed = seed;
    for (int k = 0; k < dims.members; ++k) {
      Rng rng(mix_seed(seed, 0xe5e0 + static_cast<std::uint64_t>(k)));
      e.members.push_back(Mlp::create(e.params, "m" + std::to_string(k),
                                      {dims.in, dims.hidden, dims.out}, rng));
    }
    return e;
  }

  Mat<S> member_logits(int k, const Mat<S>& x) const {
    PlainCtx<S> ctx(params);
    return members[k].forward(ctx, x);
  }

  Mat<S> member_predict(int k, const Mat<S>& x) const {
    PlainCtx<S> ctx(params);
    Mat<S> y = members[k].forward(ctx, x);
    if (loss == EnsembleLoss::Bernoulli) y = ctx.sigmoid(y);
    return y;
  }

  std::vector<Mat<S>> predict_members(const Mat<S>& x) const {
    if (x.rows() != dims.in)
      throw RuntimeError("ensemble predict: bad input shape");
    std::vector<Mat<S>> out;
    out.reserve(members.size());
    for (int k = 0; k < dims.members; ++k) out.push_back(member_predict(k, x));
    return out;
  }

  // Mean over output dims of the across-member population variance, one value
  // per batch column. Always >= 0 and invariant to member order.
  Eigen::RowVectorXd disagreement(const Mat<S>& x) const {
    const auto preds = predict_members(x);
    const int K = dims.members;
    Mat<S> mean = Mat<S>::Zero(preds[0].rows(), preds[0].cols());
    for (const auto& p : preds) mean += p;
    mean /= static_cast<S>(K);
    Mat<S> var = Mat<S>::Zero(mean.rows(), mean.cols());
    for (const auto& p : preds) {
      const Mat<S> d = p - mean;
      var += d.cwiseProduct(d);
    }
    var /= static_cast<S>(K);
    return var.template cast<double>().colwise().mean();
  }

  // One bootstrap gradient step per member. Rolls a member back (skips the
  // update) when its loss or gradient is non-finite.
  EnsembleLosses train_step(std::vector<Adam<S>>& opts, const Mat<S>& x,
                            const Mat<S>& y, std::uint64_t step_seed) {
    if (x.cols() == 0) throw RuntimeError("ensemble train: empty batch");
    EnsembleLosses out;
    const int B = static_cast<int>(x.cols());
    for (int k = 0; k < dims.members; ++k) {
      Rng boot(mix_seed(step_seed, 0xb007 + static_cast<std::uint64_t>(k)));
      Mat<S> xb(x.rows(), B), yb(y.rows(), B);
      for (int i = 0; i < B; ++i) {
        const int j = boot.uniform_int(B);
        xb.col(i) = x.col(j);
        yb.col(i) = y.col(j);
      }
      Tape<S> tape;
      TapeCtx<S> ctx(tape, params);
      auto pred = members[k].forward(ctx, ctx.constant(xb));
      typename Tape<S>::Var nll;
      if (loss == EnsembleLoss::Bernoulli) {
        auto target = ctx.constant(yb);
        nll = ctx.mean(ctx.sub(ctx.softplus(pred), ctx.mul(pred, target)));
      } else {
        nll = ctx.mean(ctx.square(ctx.sub(pred, ctx.constant(yb))));
      }
      const double v = static_cast<double>(ctx.value(nll)(0, 0));
      if (!std::isfinite(v)) {
        out.finite = false;
        out.diagnostic = "member " + std::to_string(k) + " loss non-finite";
        out.member_nll.push_back(v);
        continue;
      }
      tape.backward(nll);
      auto grads = collect_grads(tape, params.entries.size());
      bool ok = true;
      for (const auto& g : grads)
        if (g.size() > 0 && !g.allFinite()) ok = false;
      if (!ok) {
        out.finite = false;
        out.diagnostic = "member " + std::to_string(k) + " gradient non-finite";
        out.member_nll.push_back(v);
        continue;
      }
      opts[k].step(params, grads);
      out.member_nll.push_back(v);
    }
    return out;
  }

  void save(const std::string& path) const {
    save_params(path, kCkptEnsemble, dims.as_array(loss), seed, params);
  }

  static PredictorEnsemble load(const std::string& path) {
    const CheckpointHeader h = read_checkpoint_header(path);
    EnsembleDims d;
    d.members = static_cast<int>(h.dims[0]);
    d.in = static_cast<int>(h.dims[1]);
    d.hidden = static_cast<int>(h.dims[2]);
    d.out = static_cast<int>(h.dims[3]);
    PredictorEnsemble e = create(
        d, h.dims[4] == 0 ? EnsembleLoss::Bernoulli : EnsembleLoss::Gaussian,
        h.seed);
    load_params(path, kCkptEnsemble, e.params);
    return e;
  }
};

// Change-map dynamics ensemble input: flattened change map stacked on action.
template <typename S>
Mat<S> ensemble_input(const Mat<S>& change_map, const Mat<S>& action) {
  Mat<S> x(change_map.rows() + action.rows(), change_map.cols());
  x.topRows(change_map.rows()) = change_map;
  x.bottomRows(action.rows()) = action;
  return x;
}

}  // namespace playkit
