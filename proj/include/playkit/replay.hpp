#pragma once

#include <optional>
#include <string>
#include <vector>

#include "playkit/change.hpp"
#include "playkit/world.hpp"

namespace playkit {

struct Frame {
  Observation obs;
  Eigen::Vector4d action = Eigen::Vector4d::Zero();
  ChangeImage change;
};

struct TrajectoryMeta {
  std::uint64_t seed = 0;
  std::string region_id;
  std::string method;
  int episode_index = 0;

  bool operator==(const TrajectoryMeta&) const = default;
};

struct Trajectory {
  std::vector<Frame> frames;
  TrajectoryMeta meta;
  double total_change = 0.0;
};

bool operator==(const Frame& a, const Frame& b);
bool operator==(const Trajectory& a, const Trajectory& b);

// Append-only trajectory store with an optional on-disk journal. Records are
// length-prefixed; see docs/formats.md for the byte layout. Every append is
// flushed, so a journal written up to any completed episode reloads exactly.
class ReplayBuffer {
 public:
  ReplayBuffer() = default;

  // Opens (creates or truncates) a journal at `path`.
  static ReplayBuffer with_journal(const std::string& path);
  // Loads an existing journal into memory and reopens it for appending.
  static ReplayBuffer load(const std::string& path);

  void append(const Trajectory& traj);
  size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const Trajectory& operator[](size_t i) const { return items_[i]; }
  const std::vector<Trajectory>& items() const { return items_; }

 private:
  std::vector<Trajectory> items_;
  std::string journal_path_;
  bool journaling_ = false;
};

void write_trajectory_record(std::ostream& os, const Trajectory& traj);
Trajectory read_trajectory_record(std::istream& is);

}  // namespace playkit
