#include "playkit/replay.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace playkit {

bool operator==(const Frame& a, const Frame& b) {
  return a.obs == b.obs && a.action == b.action &&
         a.change.grid == b.change.grid && a.change.norm == b.change.norm;
}

bool operator==(const Trajectory& a, const Trajectory& b) {
  return a.frames == b.frames && a.meta == b.meta &&
         a.total_change == b.total_change;
}

namespace {

constexpr std::uint32_t kJournalVersion = 1;

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw RuntimeError("replay journal: truncated record");
  return v;
}

void put_string(std::ostream& os, const std::string& s) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
  const auto n = get<std::uint32_t>(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) throw RuntimeError("replay journal: truncated string");
  return s;
}

void put_gray(std::ostream& os, const ImageF& img) {
  for (int c = 0; c < img.cols(); ++c)
    for (int r = 0; r < img.rows(); ++r) {
      const auto k = static_cast<std::uint8_t>(
          std::lround(static_cast<double>(img(r, c)) * 255.0));
      put(os, k);
    }
}

ImageF get_gray(std::istream& is, int n) {
  ImageF img(n, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) img(r, c) = intensity_level(get<std::uint8_t>(is));
  return img;
}

void put_bits(std::ostream& os, const ImageB& img) {
  std::uint8_t acc = 0;
  int nbits = 0;
  for (int c = 0; c < img.cols(); ++c)
    for (int r = 0; r < img.rows(); ++r) {
      acc = static_cast<std::uint8_t>(acc | ((img(r, c) ? 1 : 0) << nbits));
      if (++nbits == 8) {
        put(os, acc);
        acc = 0;
        nbits = 0;
      }
    }
  if (nbits > 0) put(os, acc);
}

ImageB get_bits(std::istream& is, int n) {
  ImageB img(n, n);
  std::uint8_t acc = 0;
  int nbits = 0;
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) {
      if (nbits == 0) {
        acc = get<std::uint8_t>(is);
        nbits = 8;
      }
      img(r, c) = acc & 1;
      acc >>= 1;
      --nbits;
    }
  return img;
}

}  // namespace

void write_trajectory_record(std::ostream& os, const Trajectory& traj) {
  std::ostringstream payload(std::ios::binary);
  put<std::uint32_t>(payload, kJournalVersion);
  put<std::uint32_t>(payload, static_cast<std::uint32_t>(traj.meta.episode_index));
  put<std::uint64_t>(payload, traj.meta.seed);
  put_string(payload, traj.meta.region_id);
  put_string(payload, traj.meta.method);
  put<double>(payload, traj.total_change);
  put<std::uint32_t>(payload, static_cast<std::uint32_t>(traj.frames.size()));
  for (const auto& f : traj.frames) {
    put<std::uint16_t>(payload, static_cast<std::uint16_t>(f.obs.composite.rows()));
    put_gray(payload, f.obs.composite);
    put_gray(payload, f.obs.env);
    put_bits(payload, f.obs.agent);
    for (int i = 0; i < 4; ++i) put<double>(payload, f.action[i]);
    put<std::uint16_t>(payload, static_cast<std::uint16_t>(f.change.grid.rows()));
    put_bits(payload, f.change.grid);
    put<double>(payload, f.change.norm);
  }
  const std::string bytes = payload.str();
  put<std::uint32_t>(os, static_cast<std::uint32_t>(bytes.size()));
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Trajectory read_trajectory_record(std::istream& is) {
  const auto len = get<std::uint32_t>(is);
  std::string bytes(len, '\0');
  is.read(bytes.data(), len);
  if (!is) throw RuntimeError("replay journal: truncated payload");
  std::istringstream payload(bytes, std::ios::binary);

  Trajectory traj;
  const auto version = get<std::uint32_t>(payload);
  if (version != kJournalVersion)
    throw RuntimeError("replay journal: unsupported version " +
                       std::to_string(version));
  traj.meta.episode_index = static_cast<int>(get<std::uint32_t>(payload));
  traj.meta.seed = get<std::uint64_t>(payload);
  traj.meta.region_id = get_string(payload);
  traj.meta.method = get_string(payload);
  traj.total_change = get<double>(payload);
  const auto n_frames = get<std::uint32_t>(payload);
  traj.frames.resize(n_frames);
  for (auto& f : traj.frames) {
    const int n = get<std::uint16_t>(payload);
    f.obs.composite = get_gray(payload, n);
    f.obs.env = get_gray(payload, n);
    f.obs.agent = get_bits(payload, n);
    for (int i = 0; i < 4; ++i) f.action[i] = get<double>(payload);
    const int m = get<std::uint16_t>(payload);
    f.change.grid = get_bits(payload, m);
    f.change.norm = get<double>(payload);
  }
  return traj;
}

ReplayBuffer ReplayBuffer::with_journal(const std::string& path) {
  ReplayBuffer rb;
  rb.journal_path_ = path;
  rb.journaling_ = true;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw RuntimeError("cannot open replay journal '" + path + "'");
  return rb;
}

ReplayBuffer ReplayBuffer::load(const std::string& path) {
  ReplayBuffer rb;
  rb.journal_path_ = path;
  rb.journaling_ = true;
  std::ifstream f(path, std::ios::binary);
  if (!f) throw RuntimeError("cannot open replay journal '" + path + "'");
  while (f.peek() != EOF) rb.items_.push_back(read_trajectory_record(f));
  return rb;
}

void ReplayBuffer::append(const Trajectory& traj) {
  items_.push_back(traj);
  if (journaling_) {
    std::ofstream f(journal_path_, std::ios::binary | std::ios::app);
    if (!f) throw RuntimeError("cannot append to replay journal");
    write_trajectory_record(f, traj);
    f.flush();
  }
}

}  // namespace playkit
