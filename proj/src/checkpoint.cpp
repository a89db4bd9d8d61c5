#include "playkit/checkpoint.hpp"

namespace playkit {

CheckpointHeader read_checkpoint_header(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw RuntimeError("cannot open checkpoint '" + path + "'");
  CheckpointHeader h{};
  is.read(h.magic, 6);
  if (!is || std::memcmp(h.magic, "PKCKPT", 6) != 0)
    throw RuntimeError("checkpoint: bad magic in '" + path + "'");
  h.version = detail::ck_get<std::uint16_t>(is);
  h.scalar_bytes = detail::ck_get<std::uint32_t>(is);
  h.kind = detail::ck_get<std::uint32_t>(is);
  for (auto& d : h.dims) d = detail::ck_get<std::uint32_t>(is);
  h.seed = detail::ck_get<std::uint64_t>(is);
  return h;
}

}  // namespace playkit
