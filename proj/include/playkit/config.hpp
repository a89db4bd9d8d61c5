#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "playkit/awr.hpp"
#include "playkit/change.hpp"
#include "playkit/ensemble.hpp"
#include "playkit/planner.hpp"
#include "playkit/worldmodel.hpp"

namespace playkit {

enum class Method { Alan, Ec, Awr, Lexa, Icm, Random };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

// Plain INI: [section] headers, key = value lines, # comments.
struct IniFile {
  std::map<std::string, std::map<std::string, std::string>> sections;

  bool has(const std::string& sec, const std::string& key) const;
  std::string get(const std::string& sec, const std::string& key,
                  const std::string& fallback) const;
  double get_num(const std::string& sec, const std::string& key,
                 double fallback) const;
  std::int64_t get_int(const std::string& sec, const std::string& key,
                       std::int64_t fallback) const;
  bool get_bool(const std::string& sec, const std::string& key,
                bool fallback) const;
  std::vector<std::string> get_list(const std::string& sec,
                                    const std::string& key,
                                    const std::vector<std::string>& fallback)
      const;
};

IniFile parse_ini(const std::string& text, const std::string& origin);
IniFile load_ini(const std::string& path);

struct ExploreSchedule {
  int episode_len = 20;
  int bootstrap_count = 25;
  int budget = 125;
  int episodes_per_cycle = 5;
  int wm_steps = 500;
  int ens_steps = 200;
  int awr_steps = 200;
  int wm_batch = 4;
  int ens_batch = 16;
  int awr_batch = 64;
  int checkpoint_every = 5;  // cycles between checkpoint dumps (always final)
  bool concurrent = false;
};

struct RunConfig {
  Method method = Method::Alan;
  std::string task = "door";
  std::uint64_t seed = 1;
  std::string out_dir = "run";
  std::string scene_file;  // optional scene override; object id stays the task's

  ChangeConfig change;
  RssmDims dims;
  WmTrainConfig wm_train;
  int ens_hidden = 48;
  int ens_members = 5;
  AdamConfig ens_adam;
  CemConfig cem;
  ObjectiveWeights weights;
  AwrConfig awr;
  ExploreSchedule sched;

  void validate() const;
};

struct BenchmarkConfig {
  std::vector<std::string> methods = {"alan", "ec", "random"};
  std::vector<std::string> tasks = {"door"};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string out_dir = "bench";
  int jobs = 0;  // 0 = hardware concurrency
};

struct FullConfig {
  RunConfig run;
  BenchmarkConfig bench;
};

// Defaults overlaid with the INI file (when non-empty path).
FullConfig load_config(const std::string& path);
FullConfig config_from_ini(const IniFile& ini);

std::string run_config_to_text(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace playkit
