#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "playkit/achiever.hpp"
#include "playkit/baselines.hpp"
#include "playkit/config.hpp"
#include "playkit/explorer.hpp"

namespace playkit {

// Parsed metrics.csv rows.
std::vector<EpisodeRow> read_metrics_csv(const std::string& path);

double median(std::vector<double> values);

struct LoadedRun {
  RunConfig cfg;
  ReplayBuffer replay;
  std::optional<WorldModel<ProdScalar>> wm;
};

LoadedRun load_run_dir(const std::string& dir);

// Goal-reaching evaluation of a finished exploration run (10-trial protocol).
// Runs without a world model checkpoint (e.g. random) report no rate.
std::optional<double> evaluate_goal_reaching(const std::string& run_dir,
                                             std::uint64_t eval_seed);

struct BenchmarkOutcome {
  // method -> task -> median final cumulative successes across seeds
  std::map<std::string, std::map<std::string, double>> exploration;
  // method -> task -> median achiever success rate (absent when n/a)
  std::map<std::string, std::map<std::string, double>> goal_rates;
  std::vector<std::string> failed_runs;
  std::string out_dir;
};

std::string run_dir_for(const std::string& bench_dir, const std::string& task,
                        const std::string& method, std::uint64_t seed);

// Executes explorer runs for every (method, task, seed), aggregates the
// cumulative-success curves into one SVG per task, evaluates goal reaching,
// and writes a methods-by-tasks success-rate table. Failed runs are recorded
// and skipped in aggregation.
BenchmarkOutcome run_benchmark(const FullConfig& cfg);

// Aggregation over already-existing run directories (also used by `plot`).
BenchmarkOutcome aggregate_benchmark(const FullConfig& cfg);

void write_report_csv(const std::string& path, const BenchmarkOutcome& out,
                      const std::vector<std::string>& methods,
                      const std::vector<std::string>& tasks);

// Median cumulative-success curve per method for one task.
void write_task_plot(const std::string& path, const std::string& task,
                     const std::vector<std::string>& methods,
                     const std::vector<std::vector<std::vector<long>>>& curves,
                     const std::string& metadata);

}  // namespace playkit
