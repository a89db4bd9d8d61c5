#pragma once

#include <array>
#include <string>
#include <vector>

#include "playkit/checkpoint.hpp"
#include "playkit/nets.hpp"
#include "playkit/rng.hpp"
#include "playkit/types.hpp"

namespace playkit {

// Latent belief: deterministic recurrent state plus a stochastic sample with
// its Gaussian parameters. Batches are columns.
template <typename S>
struct LatentState {
  Mat<S> h;
  Mat<S> z;
  Mat<S> z_mean;
  Mat<S> z_std;

  int batch() const { return static_cast<int>(h.cols()); }
  Mat<S> feature() const {
    Mat<S> f(h.rows() + z.rows(), h.cols());
    f.topRows(h.rows()) = h;
    f.bottomRows(z.rows()) = z;
    return f;
  }
};

struct RssmDims {
  int obs = 1024;     // flattened 32x32 observation
  int embed = 128;
  int hidden = 128;
  int deter = 64;
  int stoch = 16;
  int change = 1024;  // flattened 32x32 change grid
  int action = 4;

  std::array<std::uint32_t, 8> as_array() const {
    return {static_cast<std::uint32_t>(obs), static_cast<std::uint32_t>(embed),
            static_cast<std::uint32_t>(hidden), static_cast<std::uint32_t>(deter),
            static_cast<std::uint32_t>(stoch), static_cast<std::uint32_t>(change),
            static_cast<std::uint32_t>(action), 0};
  }
};

inline RssmDims width8_dims() {
  RssmDims d;
  d.embed = 8;
  d.hidden = 8;
  d.deter = 8;
  d.stoch = 4;
  return d;
}

inline constexpr double kStdFloor = 1e-4;

// Recurrent state-space model with image decoder, embedding decoder and a
// change-prediction head.
template <typename S>
struct WorldModel {
  RssmDims dims;
  std::uint64_t seed = 0;
  ParamStore<S> params;
  Mlp enc, prior_head, post_head, img_dec, emb_dec, change_head;
  GruCell core;

  static WorldModel create(const RssmDims& dims, std::uint64_t seed) {
    WorldModel m;
    m.dims = dims;
    m.seed = seed;
    Rng rng(mix_seed(seed, 0x77726c64ULL));
    auto& ps = m.params;
    m.enc = Mlp::create(ps, "enc", {dims.obs, dims.hidden, dims.embed}, rng,
                        Act::Tanh, Act::Tanh);
    m.core = GruCell::create(ps, "core", dims.deter, dims.stoch + dims.action,
                             rng);
    m.prior_head = Mlp::create(ps, "prior",
                               {dims.deter, dims.hidden, 2 * dims.stoch}, rng);
    m.post_head = Mlp::create(
        ps, "post", {dims.deter + dims.embed, dims.hidden, 2 * dims.stoch}, rng);
    m.img_dec = Mlp::create(
        ps, "img", {dims.deter + dims.stoch, dims.hidden, dims.obs}, rng);
    m.emb_dec = Mlp::create(
        ps, "emb", {dims.deter + dims.stoch, dims.hidden, dims.embed}, rng);
    m.change_head = Mlp::create(
        ps, "change", {dims.deter + dims.stoch, dims.hidden, dims.change}, rng);
    return m;
  }

  LatentState<S> initial(int batch) const {
    LatentState<S> s;
    s.h = Mat<S>::Zero(dims.deter, batch);
    s.z = Mat<S>::Zero(dims.stoch, batch);
    s.z_mean = Mat<S>::Zero(dims.stoch, batch);
    s.z_std = Mat<S>::Ones(dims.stoch, batch);
    return s;
  }

  // ---- generic graph pieces ---------------------------------------------

  template <typename Ctx>
  typename Ctx::V encode_g(Ctx& ctx, typename Ctx::V obs) const {
    return enc.forward(ctx, obs);
  }

  template <typename Ctx>
  typename Ctx::V core_g(Ctx& ctx, typename Ctx::V h, typename Ctx::V z,
                         typename Ctx::V action) const {
    return core.forward(ctx, h, ctx.vcat(z, action));
  }

  // Gaussian head: stats -> (mean, std) with a softplus floor on std.
  template <typename Ctx>
  std::pair<typename Ctx::V, typename Ctx::V> split_stats_g(
      Ctx& ctx, typename Ctx::V stats) const {
    auto mean = ctx.rows(stats, 0, dims.stoch);
    auto std = ctx.cadd(ctx.softplus(ctx.rows(stats, dims.stoch, dims.stoch)),
                        static_cast<S>(kStdFloor));
    return {mean, std};
  }

  template <typename Ctx>
  std::pair<typename Ctx::V, typename Ctx::V> prior_stats_g(
      Ctx& ctx, typename Ctx::V h) const {
    return split_stats_g(ctx, prior_head.forward(ctx, h));
  }

  template <typename Ctx>
  std::pair<typename Ctx::V, typename Ctx::V> post_stats_g(
      Ctx& ctx, typename Ctx::V h, typename Ctx::V embed) const {
    return split_stats_g(ctx, post_head.forward(ctx, ctx.vcat(h, embed)));
  }

  // ---- plain (inference) interface ---------------------------------------

  Mat<S> encode(const Mat<S>& obs) const {
    if (obs.rows() != dims.obs) throw RuntimeError("encode: bad input shape");
    PlainCtx<S> ctx(params);
    return encode_g(ctx, obs);
  }

  LatentState<S> posterior_step(const LatentState<S>& prev, const Mat<S>& action,
                                const Mat<S>& embed_next,
                                const Mat<S>& eps) const {
    if (!prev.h.allFinite() || !action.allFinite() || !embed_next.allFinite())
      throw RuntimeError("posterior_step: non-finite inputs");
    PlainCtx<S> ctx(params);
    LatentState<S> out;
    out.h = core_g(ctx, prev.h, prev.z, action);
    auto [mean, std] = post_stats_g(ctx, out.h, embed_next);
    out.z_mean = mean;
    out.z_std = std;
    out.z = mean + std.cwiseProduct(eps);
    return out;
  }

  // eps == nullptr uses the prior mean (deterministic rollout).
  LatentState<S> prior_step(const LatentState<S>& prev, const Mat<S>& action,
                            const Mat<S>* eps = nullptr) const {
    PlainCtx<S> ctx(params);
    LatentState<S> out;
    out.h = core_g(ctx, prev.h, prev.z, action);
    auto [mean, std] = prior_stats_g(ctx, out.h);
    out.z_mean = mean;
    out.z_std = std;
    out.z = eps != nullptr ? Mat<S>(mean + std.cwiseProduct(*eps)) : mean;
    return out;
  }

  Mat<S> decode_image(const LatentState<S>& s) const {
    PlainCtx<S> ctx(params);
    return img_dec.forward(ctx, s.feature());
  }

  Mat<S> decode_embed(const LatentState<S>& s) const {
    PlainCtx<S> ctx(params);
    return emb_dec.forward(ctx, s.feature());
  }

  // Per-pixel Bernoulli probabilities of the change grid, in (0, 1).
  Mat<S> predict_change(const LatentState<S>& s) const {
    PlainCtx<S> ctx(params);
    return ctx.sigmoid(change_head.forward(ctx, s.feature()));
  }

  // Expected change norm per batch column: mean of the probability map.
  Eigen::RowVectorXd expected_change_norm(const LatentState<S>& s) const {
    const Mat<S> p = predict_change(s);
    return p.template cast<double>().colwise().mean();
  }

  // Iterated prior; one latent per action, sampled with per-step seeded noise.
  std::vector<LatentState<S>> imagine(const LatentState<S>& start,
                                      const std::vector<Mat<S>>& actions,
                                      std::uint64_t seed) const {
    if (actions.empty()) throw RuntimeError("imagine: no actions");
    std::vector<LatentState<S>> out;
    out.reserve(actions.size());
    LatentState<S> s = start;
    for (size_t t = 0; t < actions.size(); ++t) {
      const Mat<S> eps =
          normal_matrix(dims.stoch, static_cast<int>(actions[t].cols()),
                        mix_seed(seed, t));
      s = prior_step(s, actions[t], &eps);
      out.push_back(s);
    }
    return out;
  }

  Mat<S> normal_matrix(int rows, int cols, std::uint64_t seed) const {
    Rng rng(seed);
    Mat<S> m(rows, cols);
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r) m(r, c) = static_cast<S>(rng.normal());
    return m;
  }

  void save(const std::string& path) const {
    save_params(path, kCkptWorldModel, dims.as_array(), seed, params);
  }

  static WorldModel load(const std::string& path) {
    const CheckpointHeader h = read_checkpoint_header(path);
    RssmDims d;
    d.obs = static_cast<int>(h.dims[0]);
    d.embed = static_cast<int>(h.dims[1]);
    d.hidden = static_cast<int>(h.dims[2]);
    d.deter = static_cast<int>(h.dims[3]);
    d.stoch = static_cast<int>(h.dims[4]);
    d.change = static_cast<int>(h.dims[5]);
    d.action = static_cast<int>(h.dims[6]);
    WorldModel m = create(d, h.seed);
    load_params(path, kCkptWorldModel, m.params);
    m.seed = h.seed;
    return m;
  }
};

// ---------------------------------------------------------------------------
// Training

template <typename S>
struct WmBatch {
  std::vector<Mat<S>> obs;     // L entries of obs_dim x B
  std::vector<Mat<S>> act;     // L entries of action_dim x B (act[t] taken at t)
  std::vector<Mat<S>> change;  // L entries of change_dim x B, binary labels

  int length() const { return static_cast<int>(obs.size()); }
  int batch() const { return obs.empty() ? 0 : static_cast<int>(obs[0].cols()); }
};

struct WmLosses {
  double recon = 0.0;
  double embed = 0.0;
  double kl = 0.0;  // raw mean KL per step (before the free-nats floor)
  double change_nll = 0.0;
  double total = 0.0;
  bool finite = true;
  std::string diagnostic;
};

// Elementwise KL(q || p) between diagonal Gaussians.
template <typename S>
Mat<S> gaussian_kl(const Mat<S>& qm, const Mat<S>& qs, const Mat<S>& pm,
                   const Mat<S>& ps) {
  const auto qs2 = qs.array().square();
  const auto dm2 = (qm - pm).array().square();
  return ((ps.array().log() - qs.array().log()) +
          (qs2 + dm2) / (S(2) * ps.array().square()) - S(0.5))
      .matrix();
}

struct WmTrainConfig {
  double beta = 1.0;
  double free_nats = 1.0;
  AdamConfig adam;
};

// Builds the sequence ELBO + change likelihood loss on the tape. The embed
// decoder regresses a detached copy of the encoder embedding.
template <typename S>
typename Tape<S>::Var wm_build_loss(Tape<S>& tape, const WorldModel<S>& wm,
                                    const WmBatch<S>& batch,
                                    const WmTrainConfig& cfg, std::uint64_t seed,
                                    WmLosses* parts = nullptr) {
  using V = typename Tape<S>::Var;
  if (batch.length() < 2) throw RuntimeError("wm_build_loss: need length >= 2");
  TapeCtx<S> ctx(tape, wm.params);
  const int L = batch.length();
  const int B = batch.batch();
  const S inv_frames = S(1) / static_cast<S>(L * B);

  V h = ctx.constant(Mat<S>::Zero(wm.dims.deter, B));
  V z = ctx.constant(Mat<S>::Zero(wm.dims.stoch, B));
  const Mat<S> zero_action = Mat<S>::Zero(wm.dims.action, B);

  V recon, embed, kl, change;
  double kl_raw = 0.0;
  for (int t = 0; t < L; ++t) {
    V obs_t = ctx.constant(batch.obs[t]);
    V e_t = wm.encode_g(ctx, obs_t);
    V a_prev = ctx.constant(t == 0 ? zero_action : batch.act[t - 1]);
    h = wm.core_g(ctx, h, z, a_prev);
    auto [pm, ps] = wm.prior_stats_g(ctx, h);
    auto [qm, qs] = wm.post_stats_g(ctx, h, e_t);
    const Mat<S> eps = wm.normal_matrix(wm.dims.stoch, B, mix_seed(seed, t));
    z = ctx.add(qm, ctx.mul(qs, ctx.constant(eps)));
    V feat = ctx.vcat(h, z);

    V img = wm.img_dec.forward(ctx, feat);
    V recon_t = ctx.sum(ctx.square(ctx.sub(img, obs_t)));

    V emb_pred = wm.emb_dec.forward(ctx, feat);
    V emb_target = ctx.constant(ctx.value(e_t));
    V embed_t = ctx.sum(ctx.square(ctx.sub(emb_pred, emb_target)));

    // KL(q || p) for diagonal Gaussians, summed over dims, averaged over the
    // batch, floored by free nats.
    V dm = ctx.sub(qm, pm);
    V num = ctx.add(ctx.square(qs), ctx.square(dm));
    V den = ctx.cmul(ctx.square(ps), S(2));
    V kl_elem = ctx.cadd(
        ctx.add(ctx.sub(ctx.log(ps), ctx.log(qs)), ctx.div(num, den)), S(-0.5));
    V kl_mean = ctx.mean(ctx.colwise_sum(kl_elem));
    kl_raw += static_cast<double>(ctx.value(kl_mean)(0, 0));
    V kl_t = ctx.clamp_min(kl_mean, static_cast<S>(cfg.free_nats));

    V logits = wm.change_head.forward(ctx, feat);
    V target = ctx.constant(batch.change[t]);
    V change_t =
        ctx.sum(ctx.sub(ctx.softplus(logits), ctx.mul(logits, target)));

    recon = t == 0 ? recon_t : ctx.add(recon, recon_t);
    embed = t == 0 ? embed_t : ctx.add(embed, embed_t);
    kl = t == 0 ? kl_t : ctx.add(kl, kl_t);
    change = t == 0 ? change_t : ctx.add(change, change_t);
  }

  recon = ctx.cmul(recon, inv_frames);
  embed = ctx.cmul(embed, inv_frames);
  kl = ctx.cmul(kl, S(1) / static_cast<S>(L));
  change = ctx.cmul(change, inv_frames);
  V total = ctx.add(ctx.add(recon, embed),
                    ctx.add(ctx.cmul(kl, static_cast<S>(cfg.beta)), change));

  if (parts != nullptr) {
    parts->recon = static_cast<double>(ctx.value(recon)(0, 0));
    parts->embed = static_cast<double>(ctx.value(embed)(0, 0));
    parts->kl = kl_raw / L;
    parts->change_nll = static_cast<double>(ctx.value(change)(0, 0));
    parts->total = static_cast<double>(ctx.value(total)(0, 0));
  }
  return total;
}

// One optimizer step. A non-finite loss or gradient leaves the parameters
// untouched and reports a diagnostic.
template <typename S>
WmLosses wm_train_step(WorldModel<S>& wm, Adam<S>& adam, const WmBatch<S>& batch,
                       const WmTrainConfig& cfg, std::uint64_t seed) {
  Tape<S> tape;
  WmLosses losses;
  auto total = wm_build_loss(tape, wm, batch, cfg, seed, &losses);
  if (!std::isfinite(losses.total)) {
    losses.finite = false;
    losses.diagnostic = "world model loss is non-finite; step skipped";
    return losses;
  }
  tape.backward(total);
  auto grads = collect_grads(tape, wm.params.entries.size());
  for (const auto& g : grads)
    if (g.size() > 0 && !g.allFinite()) {
      losses.finite = false;
      losses.diagnostic = "world model gradient is non-finite; step skipped";
      return losses;
    }
  adam.step(wm.params, grads);
  return losses;
}

}  // namespace playkit
