#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "ampci/planes.hpp"

namespace ampci {

inline constexpr int kDefaultWaveletLevels = 4;

namespace detail {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

inline void check_haar_dims(std::size_t rows, std::size_t cols, int levels) {
  if (levels < 1) throw std::invalid_argument("haar: levels must be >= 1, got " + std::to_string(levels));
  if (rows == 0 || cols == 0) throw std::invalid_argument("haar: empty plane");
  const std::size_t block = std::size_t{1} << levels;
  if (rows % block != 0)
    throw std::invalid_argument("haar: rows (" + std::to_string(rows) + ") not divisible by 2^" +
                                std::to_string(levels));
  if (cols % block != 0)
    throw std::invalid_argument("haar: cols (" + std::to_string(cols) + ") not divisible by 2^" +
                                std::to_string(levels));
}

// One analysis step along a strided line of even length n: lows to the first
// half, highs to the second.
inline void haar_analyze_line(double* data, std::size_t n, std::size_t stride, std::vector<double>& tmp) {
  const std::size_t half = n / 2;
  tmp.resize(n);
  for (std::size_t i = 0; i < half; ++i) {
    const double a = data[(2 * i) * stride];
    const double b = data[(2 * i + 1) * stride];
    tmp[i] = (a + b) * kInvSqrt2;
    tmp[half + i] = (a - b) * kInvSqrt2;
  }
  for (std::size_t i = 0; i < n; ++i) data[i * stride] = tmp[i];
}

inline void haar_synthesize_line(double* data, std::size_t n, std::size_t stride, std::vector<double>& tmp) {
  const std::size_t half = n / 2;
  tmp.resize(n);
  for (std::size_t i = 0; i < half; ++i) {
    const double lo = data[i * stride];
    const double hi = data[(half + i) * stride];
    tmp[2 * i] = (lo + hi) * kInvSqrt2;
    tmp[2 * i + 1] = (lo - hi) * kInvSqrt2;
  }
  for (std::size_t i = 0; i < n; ++i) data[i * stride] = tmp[i];
}

}  // namespace detail

/// In-place multi-level orthonormal 2-D Haar analysis of a row-major grid.
inline void haar_forward_inplace(std::vector<double>& grid, std::size_t rows, std::size_t cols, int levels) {
  detail::check_haar_dims(rows, cols, levels);
  if (grid.size() != rows * cols) throw std::invalid_argument("haar: grid size mismatch");
  std::vector<double> tmp;
  std::size_t h = rows, w = cols;
  for (int l = 0; l < levels; ++l) {
    for (std::size_t r = 0; r < h; ++r) detail::haar_analyze_line(&grid[r * cols], w, 1, tmp);
    for (std::size_t c = 0; c < w; ++c) detail::haar_analyze_line(&grid[c], h, cols, tmp);
    h /= 2;
    w /= 2;
  }
}

inline void haar_inverse_inplace(std::vector<double>& grid, std::size_t rows, std::size_t cols, int levels) {
  detail::check_haar_dims(rows, cols, levels);
  if (grid.size() != rows * cols) throw std::invalid_argument("haar: grid size mismatch");
  std::vector<double> tmp;
  for (int l = levels - 1; l >= 0; --l) {
    const std::size_t h = rows >> l;
    const std::size_t w = cols >> l;
    for (std::size_t c = 0; c < w; ++c) detail::haar_synthesize_line(&grid[c], h, cols, tmp);
    for (std::size_t r = 0; r < h; ++r) detail::haar_synthesize_line(&grid[r * cols], w, 1, tmp);
  }
}

/// Orthonormal Haar transform. Each single-level 2-D step scales by 1/2, so
/// the sum of squares is preserved.
inline CoeffPlane haar_forward(const ImagePlane& image, int levels = kDefaultWaveletLevels) {
  CoeffPlane out(image.rows, image.cols, levels, image.pixels);
  haar_forward_inplace(out.coeffs, out.rows, out.cols, levels);
  return out;
}

inline ImagePlane haar_inverse(const CoeffPlane& coeffs) {
  ImagePlane out(coeffs.rows, coeffs.cols, coeffs.coeffs);
  haar_inverse_inplace(out.pixels, out.rows, out.cols, coeffs.levels);
  return out;
}

}  // namespace ampci
