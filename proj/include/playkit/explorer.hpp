#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "playkit/awr.hpp"
#include "playkit/config.hpp"
#include "playkit/ensemble.hpp"
#include "playkit/planner.hpp"
#include "playkit/replay.hpp"
#include "playkit/scene.hpp"
#include "playkit/world.hpp"
#include "playkit/worldmodel.hpp"

namespace playkit {

// Production scalar for training and planning.
using ProdScalar = float;
using PMat = Mat<ProdScalar>;

// Per-trajectory training tensors: columns are timesteps.
struct TrajTensors {
  PMat obs;     // obs_dim x L (pooled composite)
  PMat act;     // action_dim x L
  PMat change;  // change_dim x L
};

TrajTensors build_tensors(const Trajectory& traj, const RssmDims& dims);

// Pooled, flattened model observation for one raster frame.
PMat model_obs(const ImageF& composite, int obs_dim);

struct RunCounters {
  long wm_steps = 0;
  long change_ens_steps = 0;
  long latent_ens_steps = 0;
  long awr_steps = 0;
  long plans = 0;
  long env_steps = 0;
  long policy_actions = 0;
  bool change_ensemble_built = false;
  bool latent_ensemble_built = false;
};

struct EpisodeRow {
  int episode = 0;
  double total_change = 0.0;
  int success_flag = 0;
  long cumulative_successes = 0;
  double ec_term = 0.0;
  double dis_term = 0.0;
};

struct RunResult {
  std::string run_dir;
  std::vector<EpisodeRow> rows;
  RunCounters counters;
  long final_successes = 0;
};

// One exploration run: models, replay, counters. Episodes and training
// cycles are exposed so tests can drive the loop piecewise.
class ExplorerSession {
 public:
  explicit ExplorerSession(const RunConfig& cfg);

  const SceneConfig& scene() const { return scene_; }
  const RegionDescriptor& region() const { return region_; }
  const RunConfig& config() const { return cfg_; }
  ReplayBuffer& replay() { return replay_; }
  const RunCounters& counters() const { return counters_; }
  Objective& objective() { return objective_; }

  WorldModel<ProdScalar>& world_model() { return *wm_; }
  const PredictorEnsemble<ProdScalar>* change_ensemble() const {
    return change_ens_ ? &*change_ens_ : nullptr;
  }
  const PredictorEnsemble<ProdScalar>* latent_ensemble() const {
    return latent_ens_ ? &*latent_ens_ : nullptr;
  }
  PolicyNet<ProdScalar>& policy() { return *policy_; }
  ValueNet<ProdScalar>& value() { return *value_; }
  bool has_world_model() const { return wm_.has_value(); }
  bool has_policy() const { return policy_.has_value(); }

  void attach_journal(const std::string& path);

  // Seeded uniform-random episodes appended to the replay.
  void bootstrap(int count);

  // One episode under the configured method (planned, policy or random).
  Trajectory explore_episode(int episode_index);

  // One training block: world model, ensembles and AWR as the method needs.
  void train_cycle(int cycle_index);

  // Short training slice (1/divisor of a cycle) for the concurrent mode.
  void train_microblock(int block_index, int divisor);

  // Filter a stored trajectory to per-step world-model features (mean
  // latents); optionally emits the one-step latent prediction errors.
  PMat filter_features(const TrajTensors& t,
                       Eigen::RowVectorXd* icm_rewards = nullptr) const;

  bool episode_success(const Trajectory& traj) const;

  const std::vector<EpisodeRow>& rows() const { return rows_; }

 private:
  friend RunResult run_explorer(const RunConfig& cfg);

  Trajectory rollout(int episode_index, std::uint64_t ep_seed);
  std::vector<Eigen::Vector4d> plan_segment(const LatentState<ProdScalar>& s,
                                            std::uint64_t seg_seed,
                                            double* ec_term, double* dis_term);
  void record_episode(const Trajectory& traj, bool success);
  void train_world_model(std::uint64_t seed, int steps);
  void train_change_ensemble(std::uint64_t seed, int steps);
  void train_latent_ensemble(std::uint64_t seed, int steps);
  void train_awr(std::uint64_t seed, int steps);
  WmBatch<ProdScalar> sample_wm_batch(Rng& rng) const;
  void save_checkpoints(const std::string& dir, int cycle) const;

  RunConfig cfg_;
  SceneConfig scene_;
  RegionDescriptor region_;
  std::string task_object_;
  ReplayBuffer replay_;
  std::vector<TrajTensors> tensors_;  // parallel to replay
  std::vector<char> successes_;       // parallel to replay

  std::optional<WorldModel<ProdScalar>> wm_;
  std::optional<Adam<ProdScalar>> wm_opt_;
  std::optional<PredictorEnsemble<ProdScalar>> change_ens_;
  std::vector<Adam<ProdScalar>> change_ens_opts_;
  std::optional<PredictorEnsemble<ProdScalar>> latent_ens_;
  std::vector<Adam<ProdScalar>> latent_ens_opts_;
  std::optional<PolicyNet<ProdScalar>> policy_;
  std::optional<Adam<ProdScalar>> policy_opt_;
  std::optional<ValueNet<ProdScalar>> value_;
  std::optional<Adam<ProdScalar>> value_opt_;

  Objective objective_;
  RunCounters counters_;
  std::vector<EpisodeRow> rows_;
  long cumulative_successes_ = 0;
};

// The full loop: bootstrap, alternating sample/train cycles, persistence
// (config snapshot, journal, metrics CSV, checkpoints). Reproducible from the
// seed in the default (sequential) mode.
RunResult run_explorer(const RunConfig& cfg);

std::string metrics_csv_path(const std::string& run_dir);
void write_metrics_csv(const std::string& path,
                       const std::vector<EpisodeRow>& rows);

}  // namespace playkit
