#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace playkit {

// Dense matrix of a given scalar; batches are stored as columns throughout.
template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// Raster images. Grayscale values are always k/255 so that the on-disk byte
// encoding round-trips exactly.
using ImageF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic>;
using ImageB = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

using Vec2 = Eigen::Vector2d;

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct RuntimeError : std::runtime_error {
  explicit RuntimeError(const std::string& msg) : std::runtime_error(msg) {}
};

inline float intensity_level(int k) { return static_cast<float>(k) / 255.0f; }

}  // namespace playkit
