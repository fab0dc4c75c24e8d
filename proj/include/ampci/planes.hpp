#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ampci {

/// Grayscale image, row-major. Pixels are in [0,1] once normalized by the
/// loader; nothing here enforces that.
struct ImagePlane {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> pixels;

  ImagePlane() = default;
  ImagePlane(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), pixels(r * c, fill) {}
  ImagePlane(std::size_t r, std::size_t c, std::vector<double> values)
      : rows(r), cols(c), pixels(std::move(values)) {
    if (pixels.size() != rows * cols)
      throw std::invalid_argument("ImagePlane: pixel count " + std::to_string(pixels.size()) +
                                  " does not match " + std::to_string(rows) + "x" +
                                  std::to_string(cols));
  }

  std::size_t size() const { return pixels.size(); }
  double& operator()(std::size_t r, std::size_t c) { return pixels[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return pixels[r * cols + c]; }

  std::span<double> view() { return pixels; }
  std::span<const double> view() const { return pixels; }

  bool operator==(const ImagePlane&) const = default;
};

/// Wavelet coefficients in the nested (Mallat) pyramid layout. The level-L
/// approximation band occupies the top-left (rows >> L) x (cols >> L) block.
struct CoeffPlane {
  std::size_t rows = 0;
  std::size_t cols = 0;
  int levels = 0;
  std::vector<double> coeffs;

  CoeffPlane() = default;
  CoeffPlane(std::size_t r, std::size_t c, int l, double fill = 0.0)
      : rows(r), cols(c), levels(l), coeffs(r * c, fill) {}
  CoeffPlane(std::size_t r, std::size_t c, int l, std::vector<double> values)
      : rows(r), cols(c), levels(l), coeffs(std::move(values)) {
    if (coeffs.size() != rows * cols)
      throw std::invalid_argument("CoeffPlane: coefficient count does not match dimensions");
  }

  std::size_t size() const { return coeffs.size(); }
  double& operator()(std::size_t r, std::size_t c) { return coeffs[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return coeffs[r * cols + c]; }

  std::size_t approx_rows() const { return rows >> levels; }
  std::size_t approx_cols() const { return cols >> levels; }

  bool operator==(const CoeffPlane&) const = default;
};

inline double energy(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace ampci
