#pragma once

#include <string>
#include <vector>

#include "playkit/explorer.hpp"
#include "playkit/image.hpp"
#include "playkit/planner.hpp"
#include "playkit/replay.hpp"
#include "playkit/world.hpp"
#include "playkit/worldmodel.hpp"

namespace playkit {

struct GoalSpec {
  ImageF goal_image;
  std::string task_id;
};

// Fixed image descriptor: 8x8 grid of mean intensities, flattened (dim 64).
// Works for any square image whose side is a multiple of 8.
Eigen::VectorXd feature(const Mat<double>& image);
inline Eigen::VectorXd feature(const ImageF& image) {
  return feature(Mat<double>(image.cast<double>()));
}

struct RetrievalHit {
  size_t traj_index = 0;
  int frame_index = 0;
  double distance = 0.0;
};

// Trajectories ranked by their minimum frame distance to the goal feature;
// ties broken by recency (newer first). k beyond the buffer size truncates.
std::vector<RetrievalHit> knn_retrieve(const ReplayBuffer& replay,
                                       const GoalSpec& goal, int k);

struct AchieveConfig {
  int top_k = 2;
  int trials_per = 5;
  CemConfig refine{.horizon = 20,
                   .population = 32,
                   .iterations = 2,
                   .elite_frac = 0.1,
                   .init_std = 0.1,
                   .refit_std_floor = 0.02,
                   .sample_latents = true};
  std::uint64_t seed = 0;
};

struct TrialRow {
  std::string task_id;
  int trial = 0;
  int retrieved_rank = 0;
  int success = 0;
};

struct AchieveResult {
  double success_rate = 0.0;
  std::vector<TrialRow> trials;
};

// Goal-reaching trial protocol: retrieve the top_k trajectories, run each
// trials_per times from the evaluated reset state, refining the retrieved
// action sequence with CEM against imagined goal-feature distance, and score
// the task success predicate on the executed rollouts.
AchieveResult achieve(const SceneConfig& scene, const RegionDescriptor& region,
                      std::uint64_t reset_seed, const ReplayBuffer& replay,
                      const WorldModel<ProdScalar>& wm, const GoalSpec& goal,
                      const AchieveConfig& cfg);

void write_achieve_csv(const std::string& path, const AchieveResult& result);

// Scripted goal states: door fully open, item lifted, item displaced.
WorldState scripted_goal_state(const SceneConfig& scene,
                               const std::string& object_id);
GoalSpec scripted_goal(const SceneConfig& scene, const std::string& object_id);

// Negative minimum imagined goal-feature distance over the horizon.
template <typename S>
class GoalScorer {
 public:
  GoalScorer(const WorldModel<S>& wm, const Eigen::VectorXd& goal_feat)
      : wm_(wm), goal_(goal_feat) {}

  Eigen::RowVectorXd operator()(const std::vector<LatentState<S>>& latents,
                                const std::vector<Mat<S>>& actions) const {
    const int P = latents[0].batch();
    const int side = static_cast<int>(
        std::lround(std::sqrt(static_cast<double>(wm_.dims.obs))));
    Eigen::RowVectorXd best =
        Eigen::RowVectorXd::Constant(P, std::numeric_limits<double>::infinity());
    for (size_t t = 1; t < latents.size(); ++t) {
      const Mat<S> img = wm_.decode_image(latents[t]);
      for (int j = 0; j < P; ++j) {
        const Mat<double> frame =
            unflatten(Mat<double>(img.col(j).template cast<double>()), side,
                      side);
        const double d = (feature(frame) - goal_).norm();
        best[j] = std::min(best[j], d);
      }
    }
    return -best;
  }

 private:
  const WorldModel<S>& wm_;
  Eigen::VectorXd goal_;
};

}  // namespace playkit
