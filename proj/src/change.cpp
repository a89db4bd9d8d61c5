#include "playkit/change.hpp"

#include "playkit/image.hpp"
#include "playkit/replay.hpp"
#include "playkit/rng.hpp"

namespace playkit {

ImageB noisy_mask(const Observation& obs, const MaskNoiseConfig& noise,
                  std::uint64_t seed) {
  ImageB mask = obs.agent;
  if (noise.flip_prob > 0.0) {
    Rng rng(mix_seed(seed, 0x6d61736bULL));
    for (int c = 0; c < mask.cols(); ++c)
      for (int r = 0; r < mask.rows(); ++r)
        if (rng.bernoulli(noise.flip_prob)) mask(r, c) ^= 1;
  }
  if (noise.dilate_px > 0) mask = dilate(mask, noise.dilate_px);
  return mask;
}

ImageF mask_agent(const Observation& obs, const MaskNoiseConfig& noise,
                  std::uint64_t seed) {
  if (!noise.enabled()) return obs.env;
  const ImageB mask = noisy_mask(obs, noise, seed);
  ImageF out(obs.composite.rows(), obs.composite.cols());
  for (int c = 0; c < out.cols(); ++c)
    for (int r = 0; r < out.rows(); ++r) {
      if (!mask(r, c)) out(r, c) = obs.composite(r, c);
      else out(r, c) = obs.agent(r, c) ? obs.env(r, c) : 0.0f;
    }
  return out;
}

ChangeImage change_image(const Observation& a, const Observation& b,
                         const ChangeConfig& cfg, std::uint64_t seed) {
  if (a.composite.rows() != b.composite.rows() ||
      a.composite.cols() != b.composite.cols())
    throw RuntimeError("change_image: observation dimensions differ");
  const int n = static_cast<int>(a.composite.rows());
  if (n % cfg.change_size != 0 || n % cfg.patch != 0)
    throw RuntimeError("change_image: raster size incompatible with config");

  const Mat<double> ma =
      mask_agent(a, cfg.noise, mix_seed(seed, 1)).cast<double>();
  const Mat<double> mb =
      mask_agent(b, cfg.noise, mix_seed(seed, 2)).cast<double>();
  const Mat<double> ba = gaussian_blur(ma, cfg.blur_sigma);
  const Mat<double> bb = gaussian_blur(mb, cfg.blur_sigma);

  const Mat<double> pixdist = (ba - bb).cwiseAbs();
  const Mat<double> pa = avg_pool(ba, cfg.patch);
  const Mat<double> pb = avg_pool(bb, cfg.patch);
  const Mat<double> patchdist = (pa - pb).cwiseAbs();

  ImageB flags(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      flags(r, c) = pixdist(r, c) > cfg.pixel_threshold &&
                            patchdist(r / cfg.patch, c / cfg.patch) >
                                cfg.feature_threshold
                        ? 1
                        : 0;

  ChangeImage out;
  out.grid = max_pool(flags, n / cfg.change_size);
  out.norm = out.recompute_norm();
  return out;
}

void label_trajectory(Trajectory& traj, const ChangeConfig& cfg,
                      std::uint64_t seed) {
  if (traj.frames.empty()) throw RuntimeError("label_trajectory: no frames");
  const int n = static_cast<int>(traj.frames[0].obs.composite.rows());
  traj.frames[0].change = ChangeImage::zeros(cfg.change_size);
  (void)n;
  traj.total_change = 0.0;
  for (size_t t = 1; t < traj.frames.size(); ++t) {
    traj.frames[t].change = change_image(traj.frames[t].obs, traj.frames[0].obs,
                                         cfg, mix_seed(seed, t));
    traj.total_change += traj.frames[t].change.norm;
  }
}

}  // namespace playkit
