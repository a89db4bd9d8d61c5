#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "playkit/ensemble.hpp"
#include "playkit/rng.hpp"
#include "playkit/types.hpp"
#include "playkit/worldmodel.hpp"

namespace playkit {

struct CemConfig {
  int horizon = 10;
  int population = 64;
  int iterations = 4;
  double elite_frac = 0.1;
  double init_std = 0.5;
  double refit_std_floor = 0.05;
  bool sample_latents = true;

  int elite_count() const {
    return std::max(2, static_cast<int>(population * elite_frac));
  }
  void validate() const {
    if (horizon < 1) throw ConfigError("planner: horizon must be >= 1");
    if (iterations < 0) throw ConfigError("planner: iterations must be >= 0");
    if (population * elite_frac < 2.0)
      throw ConfigError("planner: population * elite_frac must be >= 2");
  }
};

struct ObjectiveWeights {
  double w_ec = 1.0;
  double w_dis = 1.0;

  void validate() const {
    if (w_ec < 0.0 || w_dis < 0.0)
      throw ConfigError("objective weights must be >= 0");
    if (w_ec == 0.0 && w_dis == 0.0)
      throw ConfigError("objective weights cannot both be zero");
  }
};

struct RunningStat {
  long n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void update(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double stddev() const {
    return n >= 2 ? std::sqrt(m2 / static_cast<double>(n)) : 0.0;
  }
};

// Exploration objective state: term weights plus running normalizers fed by
// every scored candidate.
struct Objective {
  ObjectiveWeights weights;
  RunningStat ec_stat;
  RunningStat dis_stat;
  double norm_floor = 1e-6;

  double ec_denom() const { return std::max(ec_stat.stddev(), norm_floor); }
  double dis_denom() const { return std::max(dis_stat.stddev(), norm_floor); }
};

// Scores a batch of imagined rollouts: latents has horizon+1 entries (start
// first), actions has horizon entries; returns one score per column.
template <typename S>
using ScoreFn = std::function<Eigen::RowVectorXd(
    const std::vector<LatentState<S>>&, const std::vector<Mat<S>>&)>;

struct CemTrace {
  std::vector<double> best_elite_score;  // per iteration
  double best_score = 0.0;
};

template <typename S>
LatentState<S> tile_latent(const LatentState<S>& s, int n) {
  LatentState<S> out;
  out.h = s.h.col(0).replicate(1, n);
  out.z = s.z.col(0).replicate(1, n);
  out.z_mean = s.z_mean.col(0).replicate(1, n);
  out.z_std = s.z_std.col(0).replicate(1, n);
  return out;
}

// Cross-entropy method over action sequences, scored through the model.
// Candidates are sampled around the running mean, clamped to [-1, 1]; the top
// elite fraction refits the sampling distribution. The best candidate found so
// far is retained as an extra elite, so the best elite score never decreases
// across iterations. Returns the final mean (the init mean when iterations==0).
template <typename S>
std::vector<Eigen::Vector4d> cem_plan(
    const WorldModel<S>& wm, const ScoreFn<S>& score, const LatentState<S>& start,
    const CemConfig& cfg,
    const std::optional<std::vector<Eigen::Vector4d>>& init_mean,
    std::uint64_t seed, CemTrace* trace = nullptr) {
  cfg.validate();
  const int H = cfg.horizon;
  const int P = cfg.population;
  const int A = wm.dims.action;
  if (init_mean && static_cast<int>(init_mean->size()) != H)
    throw RuntimeError("cem_plan: init_mean length != horizon");

  Mat<double> mean = Mat<double>::Zero(A, H);
  if (init_mean)
    for (int t = 0; t < H; ++t) mean.col(t) = (*init_mean)[t];
  Mat<double> stddev = Mat<double>::Constant(A, H, cfg.init_std);

  std::optional<Mat<double>> best_actions;
  double best_score = -std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    Rng rng(mix_seed(seed, 0xce0 + static_cast<std::uint64_t>(iter)));
    std::vector<Mat<S>> actions(H);
    for (int t = 0; t < H; ++t) {
      actions[t].resize(A, P);
      for (int j = 0; j < P; ++j)
        for (int a = 0; a < A; ++a)
          actions[t](a, j) = static_cast<S>(std::clamp(
              mean(a, t) + stddev(a, t) * rng.normal(), -1.0, 1.0));
    }

    std::vector<LatentState<S>> latents;
    latents.reserve(H + 1);
    latents.push_back(tile_latent(start, P));
    for (int t = 0; t < H; ++t) {
      const Mat<S> eps =
          cfg.sample_latents
              ? wm.normal_matrix(wm.dims.stoch, P,
                                 mix_seed(seed, 0x5a11 + iter * 131 + t))
              : Mat<S>();
      latents.push_back(wm.prior_step(latents.back(), actions[t],
                                      cfg.sample_latents ? &eps : nullptr));
    }
    const Eigen::RowVectorXd scores = score(latents, actions);

    // Rank candidates; the retained best counts as one extra candidate.
    std::vector<int> order(P);
    for (int j = 0; j < P; ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const double sa = std::isnan(scores[a])
                            ? -std::numeric_limits<double>::infinity()
                            : scores[a];
      const double sb = std::isnan(scores[b])
                            ? -std::numeric_limits<double>::infinity()
                            : scores[b];
      if (sa != sb) return sa > sb;
      return a < b;
    });
    if (std::isnan(scores[order[0]]) ||
        scores[order[0]] == -std::numeric_limits<double>::infinity()) {
      bool all_bad = true;
      for (int j = 0; j < P; ++j)
        if (std::isfinite(scores[j])) all_bad = false;
      if (all_bad && !best_actions)
        throw RuntimeError("cem_plan: degenerate elite set (all scores NaN)");
    }

    const int E = cfg.elite_count();
    // Gather elite columns (double precision for the refit).
    std::vector<Mat<double>> elite;
    for (int e = 0; e < E && e < P; ++e) {
      const int j = order[e];
      if (std::isnan(scores[j])) continue;
      Mat<double> seq(A, H);
      for (int t = 0; t < H; ++t)
        seq.col(t) = actions[t].col(j).template cast<double>();
      elite.push_back(std::move(seq));
    }
    const double pop_best = scores[order[0]];
    if (!std::isnan(pop_best) && pop_best > best_score) {
      best_score = pop_best;
      Mat<double> seq(A, H);
      for (int t = 0; t < H; ++t)
        seq.col(t) = actions[t].col(order[0]).template cast<double>();
      best_actions = std::move(seq);
    } else if (best_actions) {
      elite.push_back(*best_actions);
    }
    if (elite.empty())
      throw RuntimeError("cem_plan: degenerate elite set (all scores NaN)");

    Mat<double> emean = Mat<double>::Zero(A, H);
    for (const auto& e : elite) emean += e;
    emean /= static_cast<double>(elite.size());
    Mat<double> evar = Mat<double>::Zero(A, H);
    for (const auto& e : elite) {
      const Mat<double> d = e - emean;
      evar += d.cwiseProduct(d);
    }
    evar /= static_cast<double>(elite.size());
    mean = emean;
    stddev = evar.cwiseSqrt().cwiseMax(cfg.refit_std_floor);

    if (trace != nullptr) trace->best_elite_score.push_back(best_score);
  }

  if (trace != nullptr) trace->best_score = best_score;
  std::vector<Eigen::Vector4d> out(H);
  for (int t = 0; t < H; ++t)
    for (int a = 0; a < A; ++a) out[t][a] = std::clamp(mean(a, t), -1.0, 1.0);
  return out;
}

// ---------------------------------------------------------------------------
// The combined exploration scorer: predicted-change magnitude plus ensemble
// disagreement over the predicted change maps, each divided by the running
// std of its term (snapshotted when the scorer is created).

template <typename S>
class ExplorationScorer {
 public:
  ExplorationScorer(const WorldModel<S>& wm, const PredictorEnsemble<S>* ens,
                    Objective& obj)
      : wm_(wm), ens_(ens), obj_(obj), ec_denom_(obj.ec_denom()),
        dis_denom_(obj.dis_denom()) {
    if (obj.weights.w_dis > 0.0 && ens == nullptr)
      throw RuntimeError("exploration scorer: disagreement term needs ensemble");
  }

  Eigen::RowVectorXd operator()(const std::vector<LatentState<S>>& latents,
                                const std::vector<Mat<S>>& actions) {
    const int H = static_cast<int>(actions.size());
    const int P = latents[0].batch();
    Eigen::RowVectorXd ec_sum = Eigen::RowVectorXd::Zero(P);
    Eigen::RowVectorXd dis_sum = Eigen::RowVectorXd::Zero(P);
    for (int t = 0; t < H; ++t) {
      if (obj_.weights.w_ec > 0.0)
        ec_sum += wm_.expected_change_norm(latents[t + 1]);
      if (obj_.weights.w_dis > 0.0) {
        const Mat<S> c = wm_.predict_change(latents[t]);
        dis_sum += ens_->disagreement(ensemble_input(c, actions[t]));
      }
    }
    for (int j = 0; j < P; ++j) {
      pending_ec_.push_back(ec_sum[j]);
      pending_dis_.push_back(dis_sum[j]);
    }
    raw_ec_total_ += ec_sum.sum();
    raw_dis_total_ += dis_sum.sum();
    scored_ += P;
    return obj_.weights.w_ec * (ec_sum / ec_denom_) +
           obj_.weights.w_dis * (dis_sum / dis_denom_);
  }

  // Push the raw term samples into the running normalizers (after the plan, so
  // scores within one plan stay comparable).
  void commit() {
    for (double v : pending_ec_) obj_.ec_stat.update(v);
    for (double v : pending_dis_) obj_.dis_stat.update(v);
    pending_ec_.clear();
    pending_dis_.clear();
  }

  double mean_raw_ec() const { return scored_ ? raw_ec_total_ / scored_ : 0.0; }
  double mean_raw_dis() const {
    return scored_ ? raw_dis_total_ / scored_ : 0.0;
  }

 private:
  const WorldModel<S>& wm_;
  const PredictorEnsemble<S>* ens_;
  Objective& obj_;
  double ec_denom_, dis_denom_;
  std::vector<double> pending_ec_, pending_dis_;
  double raw_ec_total_ = 0.0, raw_dis_total_ = 0.0;
  long scored_ = 0;
};

// Scalar form of the combined objective for a single imagined rollout.
template <typename S>
double exploration_objective(const WorldModel<S>& wm,
                             const PredictorEnsemble<S>* ens, Objective& obj,
                             const std::vector<LatentState<S>>& latents,
                             const std::vector<Mat<S>>& actions) {
  if (latents.size() != actions.size() + 1)
    throw RuntimeError("exploration_objective: need len(latents) == len(actions)+1");
  ExplorationScorer<S> scorer(wm, ens, obj);
  return scorer(latents, actions)(0);
}

}  // namespace playkit
