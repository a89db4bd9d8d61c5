#include "playkit/achiever.hpp"

#include <algorithm>
#include <fstream>

#include "playkit/image.hpp"

namespace playkit {

Eigen::VectorXd feature(const Mat<double>& image) {
  const int side = static_cast<int>(image.rows());
  if (side % 8 != 0 || image.cols() != side)
    throw RuntimeError("feature: image side must be a multiple of 8");
  const Mat<double> pooled = avg_pool(image, side / 8);
  Eigen::VectorXd out(64);
  int i = 0;
  for (int c = 0; c < 8; ++c)
    for (int r = 0; r < 8; ++r) out(i++) = pooled(r, c);
  return out;
}

std::vector<RetrievalHit> knn_retrieve(const ReplayBuffer& replay,
                                       const GoalSpec& goal, int k) {
  if (replay.empty()) throw RuntimeError("knn_retrieve: empty replay");
  if (k < 1) throw RuntimeError("knn_retrieve: k must be >= 1");
  const Eigen::VectorXd goal_feat = feature(goal.goal_image);

  std::vector<RetrievalHit> hits(replay.size());
  for (size_t i = 0; i < replay.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_frame = 0;
    const auto& frames = replay[i].frames;
    for (size_t t = 0; t < frames.size(); ++t) {
      const double d = (feature(frames[t].obs.composite) - goal_feat).norm();
      if (d < best) {
        best = d;
        best_frame = static_cast<int>(t);
      }
    }
    hits[i] = {i, best_frame, best};
  }
  std::sort(hits.begin(), hits.end(),
            [](const RetrievalHit& a, const RetrievalHit& b) {
              if (a.distance != b.distance) return a.distance < b.distance;
              return a.traj_index > b.traj_index;  // newer first
            });
  if (k < static_cast<int>(hits.size())) hits.resize(k);
  return hits;
}

WorldState scripted_goal_state(const SceneConfig& scene,
                               const std::string& object_id) {
  const ObjectSpec* obj = scene.find(object_id);
  if (obj == nullptr) throw ConfigError("unknown object '" + object_id + "'");
  RegionDescriptor rd;
  for (const auto& r : regions(scene))
    if (r.object_id == object_id) rd = r;
  WorldState st = reset(scene, rd, 0);
  // Park the arm at the region center so the goal image has a neutral pose.
  st.arm.x = rd.center.x();
  st.arm.y = rd.center.y();
  switch (obj->kind) {
    case ObjectKind::HingedDoor:
      st.articulations[object_id] = obj->angle_max;
      break;
    case ObjectKind::LiftableItem: {
      FreePose& fp = st.free_poses[object_id];
      fp.y += 1.5 * obj->lift_threshold;
      fp.lifted = true;
      // The item hangs from a closed gripper.
      st.arm.x = fp.x;
      st.arm.y = fp.y;
      st.arm.gripper_closed = true;
      break;
    }
    case ObjectKind::FreestandingItem: {
      FreePose& fp = st.free_poses[object_id];
      fp.x = std::clamp(fp.x + 2.0 * obj->push_threshold,
                        scene.workspace_min.x(), scene.workspace_max.x());
      break;
    }
  }
  return st;
}

GoalSpec scripted_goal(const SceneConfig& scene, const std::string& object_id) {
  GoalSpec g;
  g.task_id = object_id;
  g.goal_image = render(scene, scripted_goal_state(scene, object_id)).composite;
  return g;
}

AchieveResult achieve(const SceneConfig& scene, const RegionDescriptor& region,
                      std::uint64_t reset_seed, const ReplayBuffer& replay,
                      const WorldModel<ProdScalar>& wm, const GoalSpec& goal,
                      const AchieveConfig& cfg) {
  if (replay.empty()) throw RuntimeError("achieve: empty replay");
  const auto hits = knn_retrieve(replay, goal, cfg.top_k);
  const Eigen::VectorXd goal_feat = feature(goal.goal_image);
  GoalScorer<ProdScalar> scorer(wm, goal_feat);
  ScoreFn<ProdScalar> fn = std::cref(scorer);

  AchieveResult out;
  int successes = 0, total = 0;
  for (size_t rank = 0; rank < hits.size(); ++rank) {
    const Trajectory& src = replay[hits[rank].traj_index];
    std::vector<Eigen::Vector4d> retrieved;
    for (const auto& f : src.frames) retrieved.push_back(f.action);

    CemConfig refine = cfg.refine;
    refine.horizon = static_cast<int>(retrieved.size());

    for (int trial = 0; trial < cfg.trials_per; ++trial) {
      WorldState st = reset(scene, region, reset_seed);
      Observation obs = render(scene, st);
      LatentState<ProdScalar> latent = wm.initial(1);
      const PMat e0 = wm.encode(model_obs(obs.composite, wm.dims.obs));
      const PMat eps = wm.normal_matrix(
          wm.dims.stoch, 1, mix_seed(cfg.seed, 0xAC0 + rank * 131 + trial));
      latent = wm.posterior_step(latent, PMat::Zero(wm.dims.action, 1), e0, eps);

      const auto plan =
          cem_plan(wm, fn, latent, refine, retrieved,
                   mix_seed(cfg.seed, 0xF1A1 + rank * 1009 + trial));

      bool succeeded = false;
      for (const auto& a : plan) {
        st = step(scene, st, Action::from_vec(a));
        if (success(scene, st, goal.task_id)) succeeded = true;
      }
      out.trials.push_back({goal.task_id, trial, static_cast<int>(rank),
                            succeeded ? 1 : 0});
      successes += succeeded ? 1 : 0;
      ++total;
    }
  }
  out.success_rate = total > 0 ? static_cast<double>(successes) / total : 0.0;
  return out;
}

void write_achieve_csv(const std::string& path, const AchieveResult& result) {
  std::ofstream os(path, std::ios::trunc);
  os << "task_id,trial,retrieved_rank,success\n";
  for (const auto& t : result.trials)
    os << t.task_id << "," << t.trial << "," << t.retrieved_rank << ","
       << t.success << "\n";
}

}  // namespace playkit
