#pragma once

#include <array>
#include <cstring>
#include <fstream>
#include <string>

#include "playkit/nets.hpp"
#include "playkit/types.hpp"

namespace playkit {

// Checkpoint kinds.
inline constexpr std::uint32_t kCkptWorldModel = 1;
inline constexpr std::uint32_t kCkptEnsemble = 2;
inline constexpr std::uint32_t kCkptPolicy = 3;
inline constexpr std::uint32_t kCkptValue = 4;

// Fixed-size architecture header followed by named parameter blocks; see
// docs/formats.md. The architecture block (magic..dims) identifies the
// network shape independent of the run seed.
struct CheckpointHeader {
  char magic[6];             // "PKCKPT"
  std::uint16_t version;     // 1
  std::uint32_t scalar_bytes;
  std::uint32_t kind;
  std::array<std::uint32_t, 8> dims;
  std::uint64_t seed;

  bool same_architecture(const CheckpointHeader& other) const {
    return std::memcmp(magic, other.magic, 6) == 0 &&
           version == other.version && scalar_bytes == other.scalar_bytes &&
           kind == other.kind && dims == other.dims;
  }
};

CheckpointHeader read_checkpoint_header(const std::string& path);

namespace detail {

template <typename T>
void ck_put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T ck_get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw RuntimeError("checkpoint: truncated file");
  return v;
}

}  // namespace detail

template <typename S>
void save_params(const std::string& path, std::uint32_t kind,
                 const std::array<std::uint32_t, 8>& dims, std::uint64_t seed,
                 const ParamStore<S>& ps) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw RuntimeError("cannot write checkpoint '" + path + "'");
  os.write("PKCKPT", 6);
  detail::ck_put<std::uint16_t>(os, 1);
  detail::ck_put<std::uint32_t>(os, sizeof(S));
  detail::ck_put<std::uint32_t>(os, kind);
  for (auto d : dims) detail::ck_put<std::uint32_t>(os, d);
  detail::ck_put<std::uint64_t>(os, seed);
  detail::ck_put<std::uint32_t>(os, static_cast<std::uint32_t>(ps.entries.size()));
  for (const auto& e : ps.entries) {
    detail::ck_put<std::uint32_t>(os, static_cast<std::uint32_t>(e.name.size()));
    os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    detail::ck_put<std::uint32_t>(os, static_cast<std::uint32_t>(e.w.rows()));
    detail::ck_put<std::uint32_t>(os, static_cast<std::uint32_t>(e.w.cols()));
    os.write(reinterpret_cast<const char*>(e.w.data()),
             static_cast<std::streamsize>(sizeof(S) * e.w.size()));
  }
}

// Loads parameter values into an existing store; names and shapes must match
// the store (i.e. the caller constructs the architecture first).
template <typename S>
CheckpointHeader load_params(const std::string& path, std::uint32_t kind,
                             ParamStore<S>& ps) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw RuntimeError("cannot open checkpoint '" + path + "'");
  CheckpointHeader h{};
  is.read(h.magic, 6);
  if (!is || std::memcmp(h.magic, "PKCKPT", 6) != 0)
    throw RuntimeError("checkpoint: bad magic in '" + path + "'");
  h.version = detail::ck_get<std::uint16_t>(is);
  if (h.version != 1) throw RuntimeError("checkpoint: unsupported version");
  h.scalar_bytes = detail::ck_get<std::uint32_t>(is);
  if (h.scalar_bytes != sizeof(S))
    throw RuntimeError("checkpoint: scalar width mismatch");
  h.kind = detail::ck_get<std::uint32_t>(is);
  if (h.kind != kind) throw RuntimeError("checkpoint: wrong kind");
  for (auto& d : h.dims) d = detail::ck_get<std::uint32_t>(is);
  h.seed = detail::ck_get<std::uint64_t>(is);
  const auto n = detail::ck_get<std::uint32_t>(is);
  if (n != ps.entries.size())
    throw RuntimeError("checkpoint: parameter count mismatch");
  for (auto& e : ps.entries) {
    const auto len = detail::ck_get<std::uint32_t>(is);
    std::string name(len, '\0');
    is.read(name.data(), len);
    if (name != e.name)
      throw RuntimeError("checkpoint: parameter name mismatch: " + name);
    const auto rows = detail::ck_get<std::uint32_t>(is);
    const auto cols = detail::ck_get<std::uint32_t>(is);
    if (rows != static_cast<std::uint32_t>(e.w.rows()) ||
        cols != static_cast<std::uint32_t>(e.w.cols()))
      throw RuntimeError("checkpoint: shape mismatch for " + name);
    is.read(reinterpret_cast<char*>(e.w.data()),
            static_cast<std::streamsize>(sizeof(S) * e.w.size()));
    if (!is) throw RuntimeError("checkpoint: truncated data");
  }
  return h;
}

}  // namespace playkit
