#include "playkit/explorer.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "playkit/baselines.hpp"
#include "playkit/image.hpp"

namespace playkit {

namespace fs = std::filesystem;

PMat model_obs(const ImageF& composite, int obs_dim) {
  const int side = static_cast<int>(std::lround(std::sqrt(double(obs_dim))));
  const int factor = static_cast<int>(composite.rows()) / side;
  const Mat<double> pooled = avg_pool(composite.cast<double>(), factor);
  return flatten<ProdScalar>(pooled);
}

TrajTensors build_tensors(const Trajectory& traj, const RssmDims& dims) {
  const int L = static_cast<int>(traj.frames.size());
  TrajTensors t;
  t.obs.resize(dims.obs, L);
  t.act.resize(dims.action, L);
  t.change.resize(dims.change, L);
  for (int i = 0; i < L; ++i) {
    const Frame& f = traj.frames[i];
    t.obs.col(i) = model_obs(f.obs.composite, dims.obs);
    t.act.col(i) = f.action.cast<ProdScalar>();
    t.change.col(i) = flatten<ProdScalar>(f.change.grid);
  }
  return t;
}

namespace {

std::uint64_t episode_seed(std::uint64_t run_seed, int episode) {
  return mix_seed(run_seed, 0xE915u + static_cast<std::uint64_t>(episode));
}

Eigen::Vector4d uniform_action(Rng& rng) {
  return {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
          rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
}

}  // namespace

ExplorerSession::ExplorerSession(const RunConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  TaskSpec task = make_task(cfg.task);
  scene_ = cfg.scene_file.empty() ? task.scene : load_scene(cfg.scene_file);
  task_object_ = task.object_id;
  bool found = false;
  for (const auto& r : regions(scene_))
    if (r.object_id == task_object_) {
      region_ = r;
      found = true;
    }
  if (!found)
    throw ConfigError("task object '" + task_object_ + "' not in scene");

  const Method m = cfg_.method;
  objective_.weights = cfg_.weights;
  if (m == Method::Ec) objective_.weights.w_dis = 0.0;
  if (m == Method::Lexa) objective_.weights.w_ec = 0.0;

  if (m != Method::Random) {
    wm_.emplace(WorldModel<ProdScalar>::create(cfg_.dims,
                                               mix_seed(cfg_.seed, 0x3000)));
    wm_opt_.emplace(Adam<ProdScalar>(cfg_.wm_train.adam));
  }
  if (m == Method::Alan) {
    EnsembleDims ed;
    ed.in = cfg_.dims.change + cfg_.dims.action;
    ed.hidden = cfg_.ens_hidden;
    ed.out = cfg_.dims.change;
    ed.members = cfg_.ens_members;
    change_ens_.emplace(PredictorEnsemble<ProdScalar>::create(
        ed, EnsembleLoss::Bernoulli, mix_seed(cfg_.seed, 0x3001)));
    for (int k = 0; k < ed.members; ++k)
      change_ens_opts_.emplace_back(Adam<ProdScalar>(cfg_.ens_adam));
    counters_.change_ensemble_built = true;
  }
  if (m == Method::Lexa) {
    EnsembleDims ed;
    ed.in = cfg_.dims.deter + cfg_.dims.stoch + cfg_.dims.action;
    ed.hidden = cfg_.ens_hidden;
    ed.out = cfg_.dims.deter + cfg_.dims.stoch;
    ed.members = cfg_.ens_members;
    latent_ens_.emplace(PredictorEnsemble<ProdScalar>::create(
        ed, EnsembleLoss::Gaussian, mix_seed(cfg_.seed, 0x3002)));
    for (int k = 0; k < ed.members; ++k)
      latent_ens_opts_.emplace_back(Adam<ProdScalar>(cfg_.ens_adam));
    counters_.latent_ensemble_built = true;
  }
  if (m == Method::Alan || m == Method::Ec || m == Method::Awr ||
      m == Method::Icm) {
    const int feat = cfg_.dims.deter + cfg_.dims.stoch;
    policy_.emplace(PolicyNet<ProdScalar>::create(
        feat, cfg_.dims.action, cfg_.awr.hidden, mix_seed(cfg_.seed, 0x3003)));
    policy_opt_.emplace(Adam<ProdScalar>(cfg_.awr.adam));
    value_.emplace(ValueNet<ProdScalar>::create(feat, cfg_.awr.hidden,
                                                mix_seed(cfg_.seed, 0x3004)));
    value_opt_.emplace(Adam<ProdScalar>(cfg_.awr.adam));
  }
}

void ExplorerSession::attach_journal(const std::string& path) {
  replay_ = ReplayBuffer::with_journal(path);
}

bool ExplorerSession::episode_success(const Trajectory& traj) const {
  // Success flags are tracked during rollout; this replays the actions for
  // stored trajectories (used by tests).
  WorldState st = reset(scene_, region_, mix_seed(traj.meta.seed, 1));
  for (const auto& f : traj.frames) {
    st = step(scene_, st, Action::from_vec(f.action));
    if (success(scene_, st, task_object_)) return true;
  }
  return false;
}

std::vector<Eigen::Vector4d> ExplorerSession::plan_segment(
    const LatentState<ProdScalar>& s, std::uint64_t seg_seed, double* ec_term,
    double* dis_term) {
  const int H = cfg_.cem.horizon;
  std::optional<std::vector<Eigen::Vector4d>> init;
  if (policy_) init = propose_actions(*policy_, *wm_, s, H);

  // Objective-free contract: with both weights zero the plan is the proposal.
  if (cfg_.method != Method::Lexa && objective_.weights.w_ec == 0.0 &&
      objective_.weights.w_dis == 0.0) {
    return init ? *init : std::vector<Eigen::Vector4d>(H, Eigen::Vector4d::Zero());
  }

  std::vector<Eigen::Vector4d> plan;
  if (cfg_.method == Method::Lexa) {
    LatentDisagreementScorer<ProdScalar> scorer(*latent_ens_, objective_);
    ScoreFn<ProdScalar> fn = std::ref(scorer);
    plan = cem_plan(*wm_, fn, s, cfg_.cem, std::nullopt, seg_seed);
    scorer.commit();
    *dis_term += scorer.mean_raw();
  } else {
    ExplorationScorer<ProdScalar> scorer(
        *wm_, change_ens_ ? &*change_ens_ : nullptr, objective_);
    ScoreFn<ProdScalar> fn = std::ref(scorer);
    plan = cem_plan(*wm_, fn, s, cfg_.cem, init, seg_seed);
    scorer.commit();
    *ec_term += scorer.mean_raw_ec();
    *dis_term += scorer.mean_raw_dis();
  }
  ++counters_.plans;
  return plan;
}

Trajectory ExplorerSession::rollout(int episode_index, std::uint64_t ep_seed) {
  const int L = cfg_.sched.episode_len;
  const Method m = cfg_.method;
  WorldState st = reset(scene_, region_, mix_seed(ep_seed, 1));
  Observation obs = render(scene_, st);

  Trajectory traj;
  traj.meta = {ep_seed, task_object_, to_string(m), episode_index};
  traj.frames.reserve(L);

  const bool planned =
      m == Method::Alan || m == Method::Ec || m == Method::Lexa;
  const bool policy_driven = m == Method::Awr || m == Method::Icm;
  const bool filtered = planned || policy_driven;

  Rng noise(mix_seed(ep_seed, 2));
  LatentState<ProdScalar> latent;
  if (filtered) {
    latent = wm_->initial(1);
    const PMat e0 = wm_->encode(model_obs(obs.composite, cfg_.dims.obs));
    const PMat eps = wm_->normal_matrix(cfg_.dims.stoch, 1, mix_seed(ep_seed, 4));
    latent = wm_->posterior_step(latent, PMat::Zero(cfg_.dims.action, 1), e0, eps);
  }

  std::vector<Eigen::Vector4d> plan;
  double ec_term = 0.0, dis_term = 0.0;
  int segments = 0;
  bool succeeded = false;

  for (int t = 0; t < L; ++t) {
    Eigen::Vector4d a;
    if (planned) {
      if (t % cfg_.cem.horizon == 0) {
        plan = plan_segment(latent, mix_seed(ep_seed, 0x9A00 + segments),
                            &ec_term, &dis_term);
        ++segments;
      }
      a = plan[t % cfg_.cem.horizon];
    } else if (policy_driven) {
      const PMat mean = policy_->mean_action(latent.feature());
      for (int i = 0; i < 4; ++i)
        a[i] = std::clamp(static_cast<double>(mean(i, 0)) +
                              cfg_.awr.action_std * noise.normal(),
                          -1.0, 1.0);
      ++counters_.policy_actions;
    } else {
      a = uniform_action(noise);
    }

    traj.frames.push_back({obs, a, ChangeImage{}});
    st = step(scene_, st, Action::from_vec(a));
    ++counters_.env_steps;
    obs = render(scene_, st);
    if (success(scene_, st, task_object_)) succeeded = true;

    if (filtered) {
      const PMat e = wm_->encode(model_obs(obs.composite, cfg_.dims.obs));
      const PMat act = a.cast<ProdScalar>();
      const PMat eps =
          wm_->normal_matrix(cfg_.dims.stoch, 1, mix_seed(ep_seed, 5 + t));
      latent = wm_->posterior_step(latent, act, e, eps);
    }
  }

  label_trajectory(traj, cfg_.change, mix_seed(ep_seed, 3));

  EpisodeRow row;
  row.episode = episode_index;
  row.total_change = traj.total_change;
  row.success_flag = succeeded ? 1 : 0;
  row.ec_term = segments > 0 ? ec_term / segments : 0.0;
  row.dis_term = segments > 0 ? dis_term / segments : 0.0;
  rows_.push_back(row);  // cumulative filled in record_episode
  return traj;
}

void ExplorerSession::record_episode(const Trajectory& traj, bool success) {
  cumulative_successes_ += success ? 1 : 0;
  rows_.back().cumulative_successes = cumulative_successes_;
  replay_.append(traj);
  tensors_.push_back(build_tensors(traj, cfg_.dims));
  successes_.push_back(success ? 1 : 0);
}

Trajectory ExplorerSession::explore_episode(int episode_index) {
  const std::uint64_t ep_seed = episode_seed(cfg_.seed, episode_index);
  Trajectory traj = rollout(episode_index, ep_seed);
  record_episode(traj, rows_.back().success_flag != 0);
  return traj;
}

void ExplorerSession::bootstrap(int count) {
  const Method m = cfg_.method;
  for (int i = 0; i < count; ++i) {
    const int episode_index = static_cast<int>(replay_.size());
    const std::uint64_t ep_seed = episode_seed(cfg_.seed, episode_index);
    // Uniform-random actions regardless of method.
    const int L = cfg_.sched.episode_len;
    WorldState st = reset(scene_, region_, mix_seed(ep_seed, 1));
    Observation obs = render(scene_, st);
    Rng noise(mix_seed(ep_seed, 2));
    Trajectory traj;
    traj.meta = {ep_seed, task_object_, to_string(m), episode_index};
    bool succeeded = false;
    for (int t = 0; t < L; ++t) {
      const Eigen::Vector4d a = uniform_action(noise);
      traj.frames.push_back({obs, a, ChangeImage{}});
      st = step(scene_, st, Action::from_vec(a));
      ++counters_.env_steps;
      obs = render(scene_, st);
      if (success(scene_, st, task_object_)) succeeded = true;
    }
    label_trajectory(traj, cfg_.change, mix_seed(ep_seed, 3));
    EpisodeRow row;
    row.episode = episode_index;
    row.total_change = traj.total_change;
    row.success_flag = succeeded ? 1 : 0;
    rows_.push_back(row);
    record_episode(traj, succeeded);
  }
}

PMat ExplorerSession::filter_features(const TrajTensors& t,
                                      Eigen::RowVectorXd* icm_rewards) const {
  const int L = static_cast<int>(t.obs.cols());
  const RssmDims& d = cfg_.dims;
  PMat feats(d.deter + d.stoch, L);
  if (icm_rewards != nullptr) icm_rewards->setZero(L);
  PlainCtx<ProdScalar> ctx(wm_->params);
  PMat h = PMat::Zero(d.deter, 1);
  PMat z = PMat::Zero(d.stoch, 1);
  for (int i = 0; i < L; ++i) {
    const PMat e = wm_->encode_g(ctx, PMat(t.obs.col(i)));
    const PMat a_prev = i == 0 ? PMat::Zero(d.action, 1) : PMat(t.act.col(i - 1));
    h = wm_->core_g(ctx, h, z, a_prev);
    auto [pm, ps] = wm_->prior_stats_g(ctx, h);
    auto [qm, qs] = wm_->post_stats_g(ctx, h, e);
    if (icm_rewards != nullptr)
      (*icm_rewards)(i) = (qm - pm).template cast<double>().norm();
    z = qm;
    feats.col(i).topRows(d.deter) = h;
    feats.col(i).bottomRows(d.stoch) = z;
  }
  return feats;
}

WmBatch<ProdScalar> ExplorerSession::sample_wm_batch(Rng& rng) const {
  const int B = cfg_.sched.wm_batch;
  const int L = cfg_.sched.episode_len;
  const RssmDims& d = cfg_.dims;
  WmBatch<ProdScalar> batch;
  batch.obs.assign(L, PMat(d.obs, B));
  batch.act.assign(L, PMat(d.action, B));
  batch.change.assign(L, PMat(d.change, B));
  for (int b = 0; b < B; ++b) {
    const int idx = rng.uniform_int(static_cast<int>(tensors_.size()));
    const TrajTensors& t = tensors_[idx];
    for (int i = 0; i < L; ++i) {
      batch.obs[i].col(b) = t.obs.col(i);
      batch.act[i].col(b) = t.act.col(i);
      batch.change[i].col(b) = t.change.col(i);
    }
  }
  return batch;
}

void ExplorerSession::train_world_model(std::uint64_t seed, int steps) {
  Rng rng(seed);
  for (int s = 0; s < steps; ++s) {
    const WmBatch<ProdScalar> batch = sample_wm_batch(rng);
    wm_train_step(*wm_, *wm_opt_, batch, cfg_.wm_train, rng.bits());
    ++counters_.wm_steps;
  }
}

void ExplorerSession::train_change_ensemble(std::uint64_t seed, int steps) {
  Rng rng(seed);
  const int B = cfg_.sched.ens_batch;
  const int L = cfg_.sched.episode_len;
  const RssmDims& d = cfg_.dims;
  for (int s = 0; s < steps; ++s) {
    PMat x(d.change + d.action, B), y(d.change, B);
    for (int b = 0; b < B; ++b) {
      const int idx = rng.uniform_int(static_cast<int>(tensors_.size()));
      const int t = rng.uniform_int(L - 1);
      const TrajTensors& tt = tensors_[idx];
      x.col(b).topRows(d.change) = tt.change.col(t);
      x.col(b).bottomRows(d.action) = tt.act.col(t);
      y.col(b) = tt.change.col(t + 1);
    }
    change_ens_->train_step(change_ens_opts_, x, y, rng.bits());
    ++counters_.change_ens_steps;
  }
}

void ExplorerSession::train_latent_ensemble(std::uint64_t seed, int steps) {
  Rng rng(seed);
  const int B = cfg_.sched.ens_batch;
  const int L = cfg_.sched.episode_len;
  const int F = cfg_.dims.deter + cfg_.dims.stoch;
  // Refresh latent transitions under the current world model.
  std::vector<PMat> feats(tensors_.size());
  for (size_t i = 0; i < tensors_.size(); ++i)
    feats[i] = filter_features(tensors_[i]);
  for (int s = 0; s < steps; ++s) {
    PMat x(F + cfg_.dims.action, B), y(F, B);
    for (int b = 0; b < B; ++b) {
      const int idx = rng.uniform_int(static_cast<int>(feats.size()));
      const int t = rng.uniform_int(L - 1);
      x.col(b).topRows(F) = feats[idx].col(t);
      x.col(b).bottomRows(cfg_.dims.action) = tensors_[idx].act.col(t);
      y.col(b) = feats[idx].col(t + 1);
    }
    latent_ens_->train_step(latent_ens_opts_, x, y, rng.bits());
    ++counters_.latent_ens_steps;
  }
}

void ExplorerSession::train_awr(std::uint64_t seed, int steps) {
  Rng rng(seed);
  const int L = cfg_.sched.episode_len;
  const int F = cfg_.dims.deter + cfg_.dims.stoch;

  // Rank trajectories: total change, or total latent surprise for icm.
  std::vector<double> totals(replay_.size());
  std::vector<Eigen::RowVectorXd> icm_rows;
  if (cfg_.method == Method::Icm) {
    icm_rows.resize(replay_.size());
    for (size_t i = 0; i < replay_.size(); ++i) {
      filter_features(tensors_[i], &icm_rows[i]);
      totals[i] = icm_rows[i].sum();
    }
  } else {
    for (size_t i = 0; i < replay_.size(); ++i)
      totals[i] = replay_[i].total_change;
  }
  const auto top = select_top_by(totals, cfg_.awr.n_top);

  // Assemble the offline dataset: features, actions, discounted returns.
  const int N = static_cast<int>(top.size()) * L;
  PMat feats(F, N), acts(cfg_.dims.action, N);
  Eigen::RowVectorXd returns(N);
  int col = 0;
  for (const size_t idx : top) {
    Eigen::RowVectorXd rewards(L);
    if (cfg_.method == Method::Icm) {
      rewards = icm_rows[idx];
    } else {
      for (int t = 0; t < L; ++t)
        rewards(t) = replay_[idx].frames[t].change.norm;
    }
    double acc = 0.0;
    Eigen::RowVectorXd ret(L);
    for (int t = L - 1; t >= 0; --t) {
      acc = rewards(t) + cfg_.awr.discount * acc;
      ret(t) = acc;
    }
    const PMat f = filter_features(tensors_[idx]);
    for (int t = 0; t < L; ++t, ++col) {
      feats.col(col) = f.col(t);
      acts.col(col) = tensors_[idx].act.col(t);
      returns(col) = ret(t);
    }
  }

  const int B = std::min(cfg_.sched.awr_batch, N);
  for (int s = 0; s < steps; ++s) {
    AwrBatch<ProdScalar> batch;
    batch.features.resize(F, B);
    batch.actions.resize(cfg_.dims.action, B);
    batch.returns.resize(B);
    for (int b = 0; b < B; ++b) {
      const int j = rng.uniform_int(N);
      batch.features.col(b) = feats.col(j);
      batch.actions.col(b) = acts.col(j);
      batch.returns(b) = returns(j);
    }
    awr_update(*policy_, *value_, *policy_opt_, *value_opt_, batch, cfg_.awr);
    ++counters_.awr_steps;
  }
}

void ExplorerSession::train_cycle(int cycle_index) {
  train_microblock(cycle_index, 1);
}

void ExplorerSession::train_microblock(int block_index, int divisor) {
  const Method m = cfg_.method;
  if (m == Method::Random) return;
  const int div = std::max(1, divisor);
  const std::uint64_t cs = mix_seed(cfg_.seed, 0x7C00 + block_index);
  train_world_model(mix_seed(cs, 1), cfg_.sched.wm_steps / div);
  if (m == Method::Alan)
    train_change_ensemble(mix_seed(cs, 2), cfg_.sched.ens_steps / div);
  if (m == Method::Lexa)
    train_latent_ensemble(mix_seed(cs, 3), cfg_.sched.ens_steps / div);
  if (m == Method::Alan || m == Method::Ec || m == Method::Awr ||
      m == Method::Icm)
    train_awr(mix_seed(cs, 4), cfg_.sched.awr_steps / div);
}

void ExplorerSession::save_checkpoints(const std::string& dir,
                                       int cycle) const {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "cycle_%03d", cycle);
  const std::string prefix = dir + "/" + buf;
  if (wm_) wm_->save(prefix + "_model.ckpt");
  if (change_ens_) change_ens_->save(prefix + "_ensemble.ckpt");
  if (latent_ens_) latent_ens_->save(prefix + "_latent_ensemble.ckpt");
  if (policy_) policy_->save(prefix + "_policy.ckpt");
  if (value_) value_->save(prefix + "_value.ckpt");
}

// ---------------------------------------------------------------------------

std::string metrics_csv_path(const std::string& run_dir) {
  return run_dir + "/metrics.csv";
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void append_metrics_row(std::ofstream& os, const EpisodeRow& r) {
  os << r.episode << "," << fmt_double(r.total_change) << "," << r.success_flag
     << "," << r.cumulative_successes << "," << fmt_double(r.ec_term) << ","
     << fmt_double(r.dis_term) << "\n";
  os.flush();
}

void write_summary(const std::string& path, const RunConfig& cfg,
                   const RunCounters& c, long final_successes) {
  std::ofstream os(path, std::ios::trunc);
  os << "key,value\n";
  os << "method," << to_string(cfg.method) << "\n";
  os << "task," << cfg.task << "\n";
  os << "seed," << cfg.seed << "\n";
  os << "config_hash," << config_hash(cfg) << "\n";
  os << "episodes," << (cfg.sched.bootstrap_count + cfg.sched.budget) << "\n";
  os << "final_successes," << final_successes << "\n";
  os << "env_steps," << c.env_steps << "\n";
  os << "wm_steps," << c.wm_steps << "\n";
  os << "change_ens_steps," << c.change_ens_steps << "\n";
  os << "latent_ens_steps," << c.latent_ens_steps << "\n";
  os << "awr_steps," << c.awr_steps << "\n";
  os << "plans," << c.plans << "\n";
  os << "policy_actions," << c.policy_actions << "\n";
  os << "change_ensemble_built," << (c.change_ensemble_built ? 1 : 0) << "\n";
  os << "latent_ensemble_built," << (c.latent_ensemble_built ? 1 : 0) << "\n";
}

// Concurrent mode: one trainer thread takes short training blocks on the
// shared models while the sampler collects episodes against snapshots. Not
// deterministic; the default sequential mode is the reproducible path.
RunResult run_concurrent(ExplorerSession& session, const RunConfig& cfg,
                         const std::string& out_dir, std::ofstream& metrics);

}  // namespace

void write_metrics_csv(const std::string& path,
                       const std::vector<EpisodeRow>& rows) {
  std::ofstream os(path, std::ios::trunc);
  os << "episode,total_change,success_flag,cumulative_successes,ec_term,dis_term\n";
  for (const auto& r : rows) append_metrics_row(os, r);
}

RunResult run_explorer(const RunConfig& cfg) {
  cfg.validate();
  const std::string out_dir = cfg.out_dir;
  fs::create_directories(out_dir);
  fs::create_directories(out_dir + "/checkpoints");

  {
    std::ofstream snap(out_dir + "/config.ini", std::ios::trunc);
    snap << run_config_to_text(cfg);
  }

  ExplorerSession session(cfg);
  session.attach_journal(out_dir + "/journal.bin");

  std::ofstream metrics(metrics_csv_path(out_dir), std::ios::trunc);
  metrics
      << "episode,total_change,success_flag,cumulative_successes,ec_term,dis_term\n";

  session.bootstrap(cfg.sched.bootstrap_count);
  for (const auto& row : session.rows()) append_metrics_row(metrics, row);

  if (cfg.sched.concurrent && cfg.method != Method::Random) {
    return run_concurrent(session, cfg, out_dir, metrics);
  }

  int planned = 0;
  int cycle = 0;
  while (planned < cfg.sched.budget) {
    const int n =
        std::min(cfg.sched.episodes_per_cycle, cfg.sched.budget - planned);
    for (int e = 0; e < n; ++e) {
      session.explore_episode(static_cast<int>(session.replay().size()));
      append_metrics_row(metrics, session.rows().back());
      ++planned;
    }
    session.train_cycle(cycle);
    if (cfg.method != Method::Random &&
        (cycle % std::max(1, cfg.sched.checkpoint_every) == 0 ||
         planned >= cfg.sched.budget))
      session.save_checkpoints(out_dir + "/checkpoints", cycle);
    ++cycle;
  }

  // Final component snapshots at the run root (used by the achiever).
  if (session.has_world_model()) session.world_model().save(out_dir + "/model.ckpt");
  if (session.change_ensemble() != nullptr)
    session.change_ensemble()->save(out_dir + "/ensemble.ckpt");
  if (session.latent_ensemble() != nullptr)
    session.latent_ensemble()->save(out_dir + "/latent_ensemble.ckpt");
  if (session.has_policy()) {
    session.policy().save(out_dir + "/policy.ckpt");
    session.value().save(out_dir + "/value.ckpt");
  }

  RunResult res;
  res.run_dir = out_dir;
  res.rows = session.rows();
  res.counters = session.counters();
  res.final_successes =
      res.rows.empty() ? 0 : res.rows.back().cumulative_successes;
  write_summary(out_dir + "/summary.csv", cfg, res.counters,
                res.final_successes);
  return res;
}

namespace {

RunResult run_concurrent(ExplorerSession& session, const RunConfig& cfg,
                         const std::string& out_dir, std::ofstream& metrics) {
  std::mutex mu;  // guards session state (models, replay, counters)
  std::atomic<bool> done{false};
  std::atomic<int> cycles{0};

  std::thread trainer([&] {
    int block = 0;
    while (!done.load()) {
      {
        std::lock_guard<std::mutex> lock(mu);
        if (!session.replay().empty()) {
          // Short slices so the sampler never waits long.
          session.train_microblock(block, 20);
          ++block;
          cycles.store(block / 20);
        }
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
  });

  int planned = 0;
  while (planned < cfg.sched.budget) {
    std::lock_guard<std::mutex> lock(mu);
    session.explore_episode(static_cast<int>(session.replay().size()));
    append_metrics_row(metrics, session.rows().back());
    ++planned;
  }
  done.store(true);
  trainer.join();

  if (session.has_world_model()) session.world_model().save(out_dir + "/model.ckpt");
  if (session.change_ensemble() != nullptr)
    session.change_ensemble()->save(out_dir + "/ensemble.ckpt");
  if (session.latent_ensemble() != nullptr)
    session.latent_ensemble()->save(out_dir + "/latent_ensemble.ckpt");
  if (session.has_policy()) {
    session.policy().save(out_dir + "/policy.ckpt");
    session.value().save(out_dir + "/value.ckpt");
  }

  RunResult res;
  res.run_dir = out_dir;
  res.rows = session.rows();
  res.counters = session.counters();
  res.final_successes =
      res.rows.empty() ? 0 : res.rows.back().cumulative_successes;
  write_summary(out_dir + "/summary.csv", cfg, res.counters,
                res.final_successes);
  return res;
}

}  // namespace

}  // namespace playkit
