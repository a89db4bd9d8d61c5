#pragma once

#include <cstdint>

#include "playkit/types.hpp"
#include "playkit/world.hpp"

namespace playkit {

struct Trajectory;

// Segmenter error knob: each mask pixel flips with flip_prob, then the mask is
// dilated by dilate_px, before the mask is applied.
struct MaskNoiseConfig {
  double flip_prob = 0.0;
  int dilate_px = 0;

  bool enabled() const { return flip_prob > 0.0 || dilate_px > 0; }
};

struct ChangeConfig {
  double blur_sigma = 1.0;
  double pixel_threshold = 0.1;
  double feature_threshold = 0.05;
  int patch = 4;        // patch descriptor pooling window
  int change_size = 32; // output grid side
  MaskNoiseConfig noise;
};

// Binary change grid plus its norm (set-pixel count / grid size).
struct ChangeImage {
  ImageB grid;
  double norm = 0.0;

  static ChangeImage zeros(int n) { return {ImageB::Zero(n, n), 0.0}; }
  double recompute_norm() const {
    return grid.cast<double>().sum() / static_cast<double>(grid.size());
  }
};

// Noisy segmenter mask for an observation's agent layer.
ImageB noisy_mask(const Observation& obs, const MaskNoiseConfig& noise,
                  std::uint64_t seed);

// Remove the robot from the frame. Pixels the mask keeps show the composite
// (a wrong keep leaks robot texture), pixels it removes reveal the env layer
// where the robot really was and go to zero where it was not (a wrong removal
// erases scene content). With zero noise this is exactly the env layer.
ImageF mask_agent(const Observation& obs, const MaskNoiseConfig& noise,
                  std::uint64_t seed);

// Change image between two observations: mask both, blur, then flag pixels
// where both the blurred pixel distance and the pooled patch-feature distance
// exceed their thresholds; max-pool down to the change grid.
ChangeImage change_image(const Observation& a, const Observation& b,
                         const ChangeConfig& cfg, std::uint64_t seed);

// Label every frame against the first one; frame 0 gets an all-zero change.
// Sets traj.total_change. Throws on an empty trajectory.
void label_trajectory(Trajectory& traj, const ChangeConfig& cfg,
                      std::uint64_t seed);

}  // namespace playkit
