#pragma once

#include <cmath>
#include <vector>

#include "playkit/types.hpp"

namespace playkit {

// Mean-pool by an integer factor; rows/cols must divide evenly.
template <typename Derived>
Mat<typename Derived::Scalar> avg_pool(const Eigen::MatrixBase<Derived>& img,
                                       int factor) {
  using S = typename Derived::Scalar;
  const int rows = static_cast<int>(img.rows()) / factor;
  const int cols = static_cast<int>(img.cols()) / factor;
  Mat<S> out(rows, cols);
  const S inv = S(1) / S(factor * factor);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      out(r, c) = img.block(r * factor, c * factor, factor, factor).sum() * inv;
  return out;
}

// Max-pool a binary image by an integer factor.
inline ImageB max_pool(const ImageB& img, int factor) {
  const int rows = static_cast<int>(img.rows()) / factor;
  const int cols = static_cast<int>(img.cols()) / factor;
  ImageB out(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      out(r, c) = img.block(r * factor, c * factor, factor, factor).maxCoeff();
  return out;
}

// Separable Gaussian blur, kernel truncated at ceil(3*sigma) and renormalized
// at the borders. sigma <= 0 is a no-op.
inline Mat<double> gaussian_blur(const Mat<double>& img, double sigma) {
  if (sigma <= 0.0) return img;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i)
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));

  const int n = static_cast<int>(img.rows());
  const int m = static_cast<int>(img.cols());
  Mat<double> tmp(n, m), out(n, m);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < m; ++c) {
      double acc = 0.0, wsum = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int rr = r + i;
        if (rr < 0 || rr >= n) continue;
        acc += k[i + radius] * img(rr, c);
        wsum += k[i + radius];
      }
      tmp(r, c) = acc / wsum;
    }
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < m; ++c) {
      double acc = 0.0, wsum = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int cc = c + i;
        if (cc < 0 || cc >= m) continue;
        acc += k[i + radius] * tmp(r, cc);
        wsum += k[i + radius];
      }
      out(r, c) = acc / wsum;
    }
  return out;
}

// Binary dilation by `px` steps of the 3x3 square structuring element
// (Chebyshev radius px).
inline ImageB dilate(const ImageB& img, int px) {
  ImageB cur = img;
  const int n = static_cast<int>(img.rows());
  const int m = static_cast<int>(img.cols());
  for (int it = 0; it < px; ++it) {
    ImageB next = cur;
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < m; ++c) {
        if (cur(r, c)) continue;
        for (int dr = -1; dr <= 1 && !next(r, c); ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            const int rr = r + dr, cc = c + dc;
            if (rr >= 0 && rr < n && cc >= 0 && cc < m && cur(rr, cc)) {
              next(r, c) = 1;
              break;
            }
          }
      }
    cur.swap(next);
  }
  return cur;
}

// Column-major flatten into a (rows*cols) x 1 vector of scalar S.
template <typename S, typename Derived>
Mat<S> flatten(const Eigen::MatrixBase<Derived>& img) {
  Mat<S> out(img.rows() * img.cols(), 1);
  int i = 0;
  for (int c = 0; c < img.cols(); ++c)
    for (int r = 0; r < img.rows(); ++r) out(i++, 0) = static_cast<S>(img(r, c));
  return out;
}

template <typename S>
Mat<S> unflatten(const Mat<S>& v, int rows, int cols) {
  Mat<S> out(rows, cols);
  int i = 0;
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) out(r, c) = v(i++, 0);
  return out;
}

}  // namespace playkit
