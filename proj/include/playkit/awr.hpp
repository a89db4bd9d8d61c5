#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "playkit/checkpoint.hpp"
#include "playkit/nets.hpp"
#include "playkit/replay.hpp"
#include "playkit/types.hpp"
#include "playkit/worldmodel.hpp"

namespace playkit {

struct AwrConfig {
  int n_top = 10;
  double beta = 1.0;          // advantage temperature
  double discount = 0.95;
  double weight_clip = 20.0;
  double action_std = 0.3;    // fixed sampling std around the policy mean
  int hidden = 64;
  AdamConfig adam{.lr = 1e-3};
};

// Tanh-squashed deterministic action head over world-model features.
template <typename S>
struct PolicyNet {
  int feature_dim = 0, action_dim = 0, hidden = 0;
  std::uint64_t seed = 0;
  ParamStore<S> params;
  Mlp net;

  static PolicyNet create(int feature_dim, int action_dim, int hidden,
                          std::uint64_t seed) {
    PolicyNet p;
    p.feature_dim = feature_dim;
    p.action_dim = action_dim;
    p.hidden = hidden;
    p.seed = seed;
    Rng rng(mix_seed(seed, 0x9001ULL));
    p.net = Mlp::create(p.params, "pi", {feature_dim, hidden, action_dim}, rng,
                        Act::Tanh, Act::Tanh);
    return p;
  }

  Mat<S> mean_action(const Mat<S>& features) const {
    PlainCtx<S> ctx(params);
    return net.forward(ctx, features);
  }

  void save(const std::string& path) const {
    save_params(path, kCkptPolicy,
                {static_cast<std::uint32_t>(feature_dim),
                 static_cast<std::uint32_t>(hidden),
                 static_cast<std::uint32_t>(action_dim), 0, 0, 0, 0, 0},
                seed, params);
  }
};

template <typename S>
struct ValueNet {
  int feature_dim = 0, hidden = 0;
  std::uint64_t seed = 0;
  ParamStore<S> params;
  Mlp net;

  static ValueNet create(int feature_dim, int hidden, std::uint64_t seed) {
    ValueNet v;
    v.feature_dim = feature_dim;
    v.hidden = hidden;
    v.seed = seed;
    Rng rng(mix_seed(seed, 0x9002ULL));
    v.net = Mlp::create(v.params, "v", {feature_dim, hidden, 1}, rng);
    return v;
  }

  Eigen::RowVectorXd predict(const Mat<S>& features) const {
    PlainCtx<S> ctx(params);
    return net.forward(ctx, features).template cast<double>().row(0);
  }

  void save(const std::string& path) const {
    save_params(path, kCkptValue,
                {static_cast<std::uint32_t>(feature_dim),
                 static_cast<std::uint32_t>(hidden), 1, 0, 0, 0, 0, 0},
                seed, params);
  }
};

// Indices of the n trajectories with the largest total change; ties broken by
// recency (newer first). n >= size returns everything.
std::vector<size_t> select_top(const ReplayBuffer& replay, int n);

inline std::vector<size_t> select_top_by(const std::vector<double>& totals,
                                         int n) {
  std::vector<size_t> idx(totals.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    if (totals[a] != totals[b]) return totals[a] > totals[b];
    return a > b;
  });
  if (n < static_cast<int>(idx.size())) idx.resize(n);
  return idx;
}

inline std::vector<size_t> select_top(const ReplayBuffer& replay, int n) {
  if (replay.empty()) throw RuntimeError("select_top: empty replay");
  std::vector<double> totals(replay.size());
  for (size_t i = 0; i < replay.size(); ++i) totals[i] = replay[i].total_change;
  return select_top_by(totals, n);
}

template <typename S>
struct AwrBatch {
  Mat<S> features;              // feature_dim x N
  Mat<S> actions;               // action_dim x N
  Eigen::RowVectorXd returns;   // 1 x N, discounted future change
};

struct AwrLosses {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double max_weight = 0.0;
  double min_weight = 0.0;
  bool weights_clipped = false;
};

// Monte-Carlo AWR: the value net regresses returns; the policy minimizes the
// squared action error weighted by exp(advantage / beta), clipped. The weights
// are computed outside the tape, so no gradient flows between the two nets.
template <typename S>
AwrLosses awr_update(PolicyNet<S>& policy, ValueNet<S>& value,
                     Adam<S>& policy_opt, Adam<S>& value_opt,
                     const AwrBatch<S>& batch, const AwrConfig& cfg) {
  const int N = static_cast<int>(batch.features.cols());
  if (N == 0) throw RuntimeError("awr_update: empty batch");
  AwrLosses out;

  const Eigen::RowVectorXd v_pred = value.predict(batch.features);
  Eigen::RowVectorXd weights(N);
  out.min_weight = std::numeric_limits<double>::infinity();
  for (int i = 0; i < N; ++i) {
    const double adv = batch.returns[i] - v_pred[i];
    double w = std::exp(adv / cfg.beta);
    if (!std::isfinite(w) || w > cfg.weight_clip) {
      w = cfg.weight_clip;
      out.weights_clipped = true;
    }
    weights[i] = w;
    out.max_weight = std::max(out.max_weight, w);
    out.min_weight = std::min(out.min_weight, w);
  }

  {
    Tape<S> tape;
    TapeCtx<S> ctx(tape, value.params);
    auto pred = value.net.forward(ctx, ctx.constant(batch.features));
    Mat<S> target(1, N);
    for (int i = 0; i < N; ++i) target(0, i) = static_cast<S>(batch.returns[i]);
    auto loss = ctx.mean(ctx.square(ctx.sub(pred, ctx.constant(target))));
    out.value_loss = static_cast<double>(ctx.value(loss)(0, 0));
    tape.backward(loss);
    auto grads = collect_grads(tape, value.params.entries.size());
    value_opt.step(value.params, grads);
  }
  {
    Tape<S> tape;
    TapeCtx<S> ctx(tape, policy.params);
    auto pred = policy.net.forward(ctx, ctx.constant(batch.features));
    auto err = ctx.square(ctx.sub(pred, ctx.constant(batch.actions)));
    Mat<S> w(1, N);
    for (int i = 0; i < N; ++i) w(0, i) = static_cast<S>(weights[i]);
    auto weighted = ctx.mul(ctx.colwise_sum(err), ctx.constant(w));
    auto loss = ctx.cmul(ctx.sum(weighted), S(1) / static_cast<S>(N));
    out.policy_loss = static_cast<double>(ctx.value(loss)(0, 0));
    tape.backward(loss);
    auto grads = collect_grads(tape, policy.params.entries.size());
    policy_opt.step(policy.params, grads);
  }
  return out;
}

// Roll the policy mean through the prior for H steps (deterministic latent
// rollout); the CEM initial proposal sequence.
template <typename S>
std::vector<Eigen::Vector4d> propose_actions(const PolicyNet<S>& policy,
                                             const WorldModel<S>& wm,
                                             const LatentState<S>& start,
                                             int horizon) {
  if (horizon < 1) throw RuntimeError("propose_actions: horizon must be >= 1");
  std::vector<Eigen::Vector4d> out;
  out.reserve(horizon);
  LatentState<S> s = start;
  for (int t = 0; t < horizon; ++t) {
    const Mat<S> a = policy.mean_action(s.feature());
    out.push_back(a.col(0).template cast<double>());
    s = wm.prior_step(s, a, nullptr);
  }
  return out;
}

}  // namespace playkit
