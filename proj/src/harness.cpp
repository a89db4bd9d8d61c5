#include "playkit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "playkit/svg.hpp"

namespace playkit {

namespace fs = std::filesystem;

std::vector<EpisodeRow> read_metrics_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw RuntimeError("cannot open metrics file '" + path + "'");
  std::vector<EpisodeRow> rows;
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    EpisodeRow r;
    std::istringstream ls(line);
    std::string field;
    std::getline(ls, field, ',');
    r.episode = std::stoi(field);
    std::getline(ls, field, ',');
    r.total_change = std::stod(field);
    std::getline(ls, field, ',');
    r.success_flag = std::stoi(field);
    std::getline(ls, field, ',');
    r.cumulative_successes = std::stol(field);
    std::getline(ls, field, ',');
    r.ec_term = std::stod(field);
    std::getline(ls, field, ',');
    r.dis_term = std::stod(field);
    rows.push_back(r);
  }
  return rows;
}

double median(std::vector<double> values) {
  if (values.empty()) throw RuntimeError("median of empty set");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

LoadedRun load_run_dir(const std::string& dir) {
  LoadedRun run;
  const std::string cfg_path = dir + "/config.ini";
  if (!fs::exists(cfg_path))
    throw ConfigError("run directory '" + dir + "' has no config.ini");
  run.cfg = config_from_ini(load_ini(cfg_path)).run;
  run.replay = ReplayBuffer::load(dir + "/journal.bin");
  const std::string model_path = dir + "/model.ckpt";
  if (fs::exists(model_path))
    run.wm.emplace(WorldModel<ProdScalar>::load(model_path));
  return run;
}

std::optional<double> evaluate_goal_reaching(const std::string& run_dir,
                                             std::uint64_t eval_seed) {
  LoadedRun run = load_run_dir(run_dir);
  if (!run.wm.has_value() || run.replay.empty()) return std::nullopt;
  const TaskSpec task = make_task(run.cfg.task);
  const SceneConfig scene =
      run.cfg.scene_file.empty() ? task.scene : load_scene(run.cfg.scene_file);
  RegionDescriptor region;
  for (const auto& r : regions(scene))
    if (r.object_id == task.object_id) region = r;
  const GoalSpec goal = scripted_goal(scene, task.object_id);
  AchieveConfig acfg;
  acfg.seed = eval_seed;
  const AchieveResult res = achieve(scene, region, mix_seed(eval_seed, 0xEA),
                                    run.replay, *run.wm, goal, acfg);
  write_achieve_csv(run_dir + "/achieve.csv", res);
  return res.success_rate;
}

std::string run_dir_for(const std::string& bench_dir, const std::string& task,
                        const std::string& method, std::uint64_t seed) {
  return bench_dir + "/" + task + "/" + method + "/seed" + std::to_string(seed);
}

void write_task_plot(const std::string& path, const std::string& task,
                     const std::vector<std::string>& methods,
                     const std::vector<std::vector<std::vector<long>>>& curves,
                     const std::string& metadata) {
  static const char* kColors[] = {"#d62728", "#1f77b4", "#2ca02c",
                                  "#9467bd", "#ff7f0e", "#8c564b"};
  std::vector<SvgSeries> series;
  for (size_t m = 0; m < methods.size(); ++m) {
    const auto& per_seed = curves[m];
    if (per_seed.empty()) continue;
    size_t len = 0;
    for (const auto& c : per_seed) len = std::max(len, c.size());
    SvgSeries s;
    s.label = methods[m];
    s.color = kColors[m % 6];
    for (size_t i = 0; i < len; ++i) {
      std::vector<double> vals;
      for (const auto& c : per_seed)
        if (i < c.size()) vals.push_back(static_cast<double>(c[i]));
      s.ys.push_back(median(vals));
    }
    series.push_back(std::move(s));
  }
  write_line_plot_svg(path, "cumulative successes: " + task, "episode",
                      "cumulative successes", series, metadata);
}

void write_report_csv(const std::string& path, const BenchmarkOutcome& out,
                      const std::vector<std::string>& methods,
                      const std::vector<std::string>& tasks) {
  std::ofstream os(path, std::ios::trunc);
  os << "# goal-reaching success rates (10-trial protocol), median across seeds\n";
  os << "# context, real-robot reference rates from the original study: "
        "cabinet 1.00, knife 0.60, fridge 0.70, topshelf 0.80 (alan); "
        "cabinet 0.70, fridge 0.50, topshelf 0.90 (ec); cabinet 0.50 (awr); "
        "cabinet 0.20 (lexa)\n";
  os << "method";
  for (const auto& t : tasks) os << "," << t;
  os << ",exploration_successes\n";
  for (const auto& m : methods) {
    os << m;
    for (const auto& t : tasks) {
      os << ",";
      const auto mt = out.goal_rates.find(m);
      if (mt != out.goal_rates.end() && mt->second.count(t))
        os << mt->second.at(t);
      else
        os << "-";
    }
    os << ",";
    bool first = true;
    const auto me = out.exploration.find(m);
    if (me != out.exploration.end()) {
      for (const auto& t : tasks) {
        if (!me->second.count(t)) continue;
        if (!first) os << ";";
        os << t << ":" << me->second.at(t);
        first = false;
      }
    }
    os << "\n";
  }
}

BenchmarkOutcome aggregate_benchmark(const FullConfig& cfg) {
  BenchmarkOutcome out;
  out.out_dir = cfg.bench.out_dir;

  for (const auto& task : cfg.bench.tasks) {
    std::vector<std::vector<std::vector<long>>> curves(cfg.bench.methods.size());
    for (size_t m = 0; m < cfg.bench.methods.size(); ++m) {
      const auto& method = cfg.bench.methods[m];
      std::vector<double> finals;
      std::vector<double> rates;
      for (const auto seed : cfg.bench.seeds) {
        const std::string dir =
            run_dir_for(cfg.bench.out_dir, task, method, seed);
        const std::string metrics = metrics_csv_path(dir);
        if (!fs::exists(metrics)) continue;
        const auto rows = read_metrics_csv(metrics);
        std::vector<long> curve;
        for (const auto& r : rows) curve.push_back(r.cumulative_successes);
        if (!curve.empty()) finals.push_back(static_cast<double>(curve.back()));
        curves[m].push_back(std::move(curve));
        if (fs::exists(dir + "/achieve_rate.txt")) {
          std::ifstream rf(dir + "/achieve_rate.txt");
          double rate;
          if (rf >> rate) rates.push_back(rate);
        }
      }
      if (!finals.empty()) out.exploration[method][task] = median(finals);
      if (!rates.empty()) out.goal_rates[method][task] = median(rates);
    }
    std::ostringstream meta;
    meta << "task=" << task << " seeds=";
    for (size_t i = 0; i < cfg.bench.seeds.size(); ++i)
      meta << (i ? "," : "") << cfg.bench.seeds[i];
    write_task_plot(cfg.bench.out_dir + "/" + task + "_successes.svg", task,
                    cfg.bench.methods, curves, meta.str());
  }
  write_report_csv(cfg.bench.out_dir + "/report.csv", out, cfg.bench.methods,
                   cfg.bench.tasks);
  return out;
}

BenchmarkOutcome run_benchmark(const FullConfig& cfg) {
  fs::create_directories(cfg.bench.out_dir);

  struct Job {
    std::string task, method;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& task : cfg.bench.tasks)
    for (const auto& method : cfg.bench.methods)
      for (const auto seed : cfg.bench.seeds) jobs.push_back({task, method, seed});

  const int workers = cfg.bench.jobs > 0
                          ? cfg.bench.jobs
                          : static_cast<int>(std::max(
                                1u, std::thread::hardware_concurrency()));
  std::atomic<size_t> next{0};
  std::vector<std::string> failures(jobs.size());
  auto worker = [&] {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& j = jobs[i];
      try {
        RunConfig rc = cfg.run;
        rc.method = method_from_string(j.method);
        rc.task = j.task;
        rc.seed = j.seed;
        rc.out_dir = run_dir_for(cfg.bench.out_dir, j.task, j.method, j.seed);
        run_explorer(rc);
        const auto rate =
            evaluate_goal_reaching(rc.out_dir, mix_seed(j.seed, 0xE0A1));
        if (rate.has_value()) {
          std::ofstream rf(rc.out_dir + "/achieve_rate.txt", std::ios::trunc);
          rf << *rate << "\n";
        }
      } catch (const std::exception& e) {
        failures[i] = j.task + "/" + j.method + "/seed" +
                      std::to_string(j.seed) + ": " + e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  BenchmarkOutcome out = aggregate_benchmark(cfg);
  for (const auto& f : failures)
    if (!f.empty()) out.failed_runs.push_back(f);
  return out;
}

}  // namespace playkit
