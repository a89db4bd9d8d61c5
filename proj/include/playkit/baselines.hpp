#pragma once

#include "playkit/ensemble.hpp"
#include "playkit/planner.hpp"
#include "playkit/worldmodel.hpp"

namespace playkit {

// One-step latent prediction error: distance between the prior mean for the
// next stochastic state and the filtered posterior sample that was reached.
template <typename S>
double icm_reward(const WorldModel<S>& wm, const LatentState<S>& s_t,
                  const Mat<S>& action, const LatentState<S>& s_next) {
  const LatentState<S> prior = wm.prior_step(s_t, action, nullptr);
  return (prior.z_mean - s_next.z).template cast<double>().norm();
}

// Disagreement of a latent one-step ensemble at (s_t, a_t): mean across latent
// dims of the across-member variance of the predicted next latent.
template <typename S>
double lexa_objective(const PredictorEnsemble<S>& latent_ens,
                      const LatentState<S>& s_t, const Mat<S>& action) {
  return latent_ens.disagreement(ensemble_input(s_t.feature(), action))(0);
}

// Batched CEM scorer for the latent-disagreement baseline; same running-std
// normalization scheme as the exploration scorer (dis term only).
template <typename S>
class LatentDisagreementScorer {
 public:
  LatentDisagreementScorer(const PredictorEnsemble<S>& ens, Objective& obj)
      : ens_(ens), obj_(obj), denom_(obj.dis_denom()) {}

  Eigen::RowVectorXd operator()(const std::vector<LatentState<S>>& latents,
                                const std::vector<Mat<S>>& actions) {
    const int H = static_cast<int>(actions.size());
    const int P = latents[0].batch();
    Eigen::RowVectorXd dis_sum = Eigen::RowVectorXd::Zero(P);
    for (int t = 0; t < H; ++t)
      dis_sum +=
          ens_.disagreement(ensemble_input(latents[t].feature(), actions[t]));
    for (int j = 0; j < P; ++j) pending_.push_back(dis_sum[j]);
    raw_total_ += dis_sum.sum();
    scored_ += P;
    return dis_sum / denom_;
  }

  void commit() {
    for (double v : pending_) obj_.dis_stat.update(v);
    pending_.clear();
  }

  double mean_raw() const { return scored_ ? raw_total_ / scored_ : 0.0; }

 private:
  const PredictorEnsemble<S>& ens_;
  Objective& obj_;
  double denom_;
  std::vector<double> pending_;
  double raw_total_ = 0.0;
  long scored_ = 0;
};

}  // namespace playkit
