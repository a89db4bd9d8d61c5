#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "playkit/achiever.hpp"
#include "playkit/checkpoint.hpp"
#include "playkit/harness.hpp"
#include "playkit/svg.hpp"

namespace fs = std::filesystem;
using namespace playkit;

namespace {

int cmd_explore(const std::string& config_path, const std::string& method,
                const std::string& task, std::int64_t seed,
                const std::string& out, std::int64_t budget, bool concurrent) {
  FullConfig fc = load_config(config_path);
  RunConfig& rc = fc.run;
  if (!method.empty()) rc.method = method_from_string(method);
  if (!task.empty()) rc.task = task;
  if (seed >= 0) rc.seed = static_cast<std::uint64_t>(seed);
  if (!out.empty()) rc.out_dir = out;
  if (budget >= 0) rc.sched.budget = static_cast<int>(budget);
  if (concurrent) rc.sched.concurrent = true;
  rc.validate();

  const RunResult res = run_explorer(rc);
  std::cout << "run " << res.run_dir << ": " << res.rows.size()
            << " episodes, " << res.final_successes
            << " coincidental successes\n";
  return 0;
}

int cmd_achieve(const std::string& run_dir, const std::string& task,
                std::int64_t seed, const std::string& out) {
  LoadedRun run = load_run_dir(run_dir);
  if (!run.wm.has_value())
    throw RuntimeError("run '" + run_dir + "' has no model checkpoint");
  const std::string task_name = task.empty() ? run.cfg.task : task;
  const TaskSpec ts = make_task(task_name);
  const SceneConfig scene =
      run.cfg.scene_file.empty() ? ts.scene : load_scene(run.cfg.scene_file);
  RegionDescriptor region;
  for (const auto& r : regions(scene))
    if (r.object_id == ts.object_id) region = r;
  const GoalSpec goal = scripted_goal(scene, ts.object_id);
  AchieveConfig acfg;
  acfg.seed = seed >= 0 ? static_cast<std::uint64_t>(seed) : run.cfg.seed;
  const AchieveResult res = achieve(scene, region, mix_seed(acfg.seed, 0xEA),
                                    run.replay, *run.wm, goal, acfg);
  const std::string out_path =
      out.empty() ? run_dir + "/achieve.csv" : out;
  write_achieve_csv(out_path, res);
  std::cout << "task " << task_name << ": success rate " << res.success_rate
            << " over " << res.trials.size() << " trials -> " << out_path
            << "\n";
  return 0;
}

int cmd_benchmark(const std::string& config_path, const std::string& out,
                  std::int64_t jobs) {
  FullConfig fc = load_config(config_path);
  if (!out.empty()) fc.bench.out_dir = out;
  if (jobs > 0) fc.bench.jobs = static_cast<int>(jobs);
  const BenchmarkOutcome res = run_benchmark(fc);
  std::cout << "benchmark written to " << res.out_dir << "\n";
  for (const auto& f : res.failed_runs) std::cerr << "failed: " << f << "\n";
  return res.failed_runs.empty() ? 0 : 1;
}

int cmd_inspect(const std::string& dir) {
  if (!fs::exists(dir + "/config.ini"))
    throw ConfigError("'" + dir + "' is not a run directory");
  LoadedRun run = load_run_dir(dir);
  std::cout << "run directory: " << dir << "\n";
  std::cout << "method: " << to_string(run.cfg.method) << "  task: "
            << run.cfg.task << "  seed: " << run.cfg.seed << "\n";
  std::cout << "trajectories: " << run.replay.size() << "\n";
  if (!run.replay.empty()) {
    double total = 0.0;
    for (const auto& t : run.replay.items()) total += t.total_change;
    std::cout << "mean total change: " << total / run.replay.size() << "\n";
  }
  const std::string metrics = metrics_csv_path(dir);
  if (fs::exists(metrics)) {
    const auto rows = read_metrics_csv(metrics);
    std::cout << "episodes: " << rows.size() << "  successes: "
              << (rows.empty() ? 0 : rows.back().cumulative_successes) << "\n";
  }
  if (fs::exists(dir + "/model.ckpt")) {
    const auto h = read_checkpoint_header(dir + "/model.ckpt");
    std::cout << "model checkpoint: obs " << h.dims[0] << " embed " << h.dims[1]
              << " hidden " << h.dims[2] << " deter " << h.dims[3] << " stoch "
              << h.dims[4] << "\n";
  }
  return 0;
}

int cmd_plot(const std::vector<std::string>& dirs, const std::string& out) {
  static const char* kColors[] = {"#d62728", "#1f77b4", "#2ca02c",
                                  "#9467bd", "#ff7f0e", "#8c564b"};
  std::vector<SvgSeries> series;
  std::string meta = "runs:";
  for (size_t i = 0; i < dirs.size(); ++i) {
    const auto rows = read_metrics_csv(metrics_csv_path(dirs[i]));
    SvgSeries s;
    s.label = fs::path(dirs[i]).filename().string();
    s.color = kColors[i % 6];
    for (const auto& r : rows)
      s.ys.push_back(static_cast<double>(r.cumulative_successes));
    series.push_back(std::move(s));
    meta += " " + dirs[i];
  }
  const std::string path = out.empty() ? "plot.svg" : out;
  write_line_plot_svg(path, "cumulative successes", "episode",
                      "cumulative successes", series, meta);
  std::cout << "wrote " << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"playkit: self-supervised exploration in a 2D play kitchen"};
  app.require_subcommand(1);

  std::string config_path, method, task, out, run_dir;
  std::int64_t seed = -1, budget = -1, jobs = -1;
  bool concurrent = false;
  std::vector<std::string> dirs;

  auto* explore = app.add_subcommand("explore", "run one exploration session");
  explore->add_option("--config", config_path, "config file (INI)");
  explore->add_option("--method", method, "alan|ec|awr|lexa|icm|random");
  explore->add_option("--task", task, "door|knife|pan|shelf|fridge|pot");
  explore->add_option("--seed", seed, "run seed");
  explore->add_option("--out", out, "output run directory");
  explore->add_option("--budget", budget, "episodes after bootstrap");
  explore->add_flag("--concurrent", concurrent,
                    "sampler/trainer threads (not bit-reproducible)");

  auto* achieve_cmd =
      app.add_subcommand("achieve", "goal-reaching trials on a finished run");
  achieve_cmd->add_option("--run", run_dir, "run directory")->required();
  achieve_cmd->add_option("--task", task, "task name (default: run's task)");
  achieve_cmd->add_option("--seed", seed, "evaluation seed");
  achieve_cmd->add_option("--out", out, "results CSV path");

  auto* bench = app.add_subcommand("benchmark", "methods x tasks x seeds");
  bench->add_option("--config", config_path, "config file (INI)");
  bench->add_option("--out", out, "benchmark output directory");
  bench->add_option("--jobs", jobs, "parallel runs");

  auto* inspect = app.add_subcommand("inspect", "summarize a run directory");
  inspect->add_option("dir", run_dir, "run directory")->required();

  auto* plot = app.add_subcommand("plot", "plot metrics from run directories");
  plot->add_option("dirs", dirs, "run directories")->required();
  plot->add_option("--out", out, "output SVG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(explore))
      return cmd_explore(config_path, method, task, seed, out, budget,
                         concurrent);
    if (app.got_subcommand(achieve_cmd))
      return cmd_achieve(run_dir, task, seed, out);
    if (app.got_subcommand(bench)) return cmd_benchmark(config_path, out, jobs);
    if (app.got_subcommand(inspect)) return cmd_inspect(run_dir);
    if (app.got_subcommand(plot)) return cmd_plot(dirs, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
