#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ampci/planes.hpp"

namespace ampci {

inline constexpr std::size_t kPatchSize = 192;
inline constexpr std::size_t kResizedPatchSize = 128;

enum class ExtractionMethod {
  none,     // whole image (cropped later to the wavelet block size)
  method1,  // upper-left 192x192, area-resampled to 128x128
  method2,  // upper-left 192x192, unchanged
};

inline ExtractionMethod extraction_method_from_name(std::string_view name) {
  if (name == "1" || name == "method1") return ExtractionMethod::method1;
  if (name == "2" || name == "method2") return ExtractionMethod::method2;
  if (name == "none" || name == "0") return ExtractionMethod::none;
  throw std::invalid_argument("unknown extraction method '" + std::string(name) + "' (expected 1, 2 or none)");
}

inline ImagePlane crop(const ImagePlane& img, std::size_t top, std::size_t left, std::size_t rows, std::size_t cols) {
  if (top + rows > img.rows || left + cols > img.cols) throw std::invalid_argument("crop: window outside image");
  ImagePlane out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    std::copy_n(img.pixels.begin() + static_cast<std::ptrdiff_t>((top + r) * img.cols + left), cols,
                out.pixels.begin() + static_cast<std::ptrdiff_t>(r * cols));
  return out;
}

/// Largest upper-left crop whose sides are multiples of `block`.
inline ImagePlane crop_to_multiple(const ImagePlane& img, std::size_t block) {
  const std::size_t rows = img.rows / block * block;
  const std::size_t cols = img.cols / block * block;
  if (rows == 0 || cols == 0)
    throw std::invalid_argument("crop_to_multiple: image smaller than block size " + std::to_string(block));
  return crop(img, 0, 0, rows, cols);
}

namespace detail {

// weights[o] lists (source index, weight) covering output cell o, where each
// output cell spans in/out source samples and the weights sum to one.
inline std::vector<std::vector<std::pair<std::size_t, double>>> area_weights(std::size_t in, std::size_t out) {
  std::vector<std::vector<std::pair<std::size_t, double>>> w(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t o = 0; o < out; ++o) {
    const double lo = static_cast<double>(o) * scale;
    const double hi = lo + scale;
    for (auto k = static_cast<std::size_t>(lo); k < in && static_cast<double>(k) < hi; ++k) {
      const double overlap = std::min(hi, static_cast<double>(k + 1)) - std::max(lo, static_cast<double>(k));
      if (overlap > 0.0) w[o].emplace_back(k, overlap / scale);
    }
  }
  return w;
}

}  // namespace detail

/// Area-averaging resample: each output pixel is the mean of the source
/// region it covers. Separable; preserves constants.
inline ImagePlane resize_area(const ImagePlane& img, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("resize_area: zero target size");
  const auto wr = detail::area_weights(img.rows, rows);
  const auto wc = detail::area_weights(img.cols, cols);
  ImagePlane tmp(img.rows, cols);
  for (std::size_t r = 0; r < img.rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (const auto& [k, w] : wc[c]) acc += w * img(r, k);
      tmp(r, c) = acc;
    }
  ImagePlane out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (const auto& [k, w] : wr[r]) acc += w * tmp(k, c);
      out(r, c) = acc;
    }
  return out;
}

/// Upper-left patch extraction. Inputs already at the method's target size
/// are returned unchanged, so extraction is idempotent.
inline ImagePlane extract_patch(const ImagePlane& img, ExtractionMethod method) {
  switch (method) {
    case ExtractionMethod::none:
      return img;
    case ExtractionMethod::method1:
      if (img.rows == kResizedPatchSize && img.cols == kResizedPatchSize) return img;
      break;
    case ExtractionMethod::method2:
      break;
  }
  if (img.rows < kPatchSize || img.cols < kPatchSize)
    throw std::invalid_argument("extract_patch: image is " + std::to_string(img.rows) + "x" + std::to_string(img.cols) +
                                ", need at least 192x192");
  ImagePlane patch = crop(img, 0, 0, kPatchSize, kPatchSize);
  if (method == ExtractionMethod::method1) return resize_area(patch, kResizedPatchSize, kResizedPatchSize);
  return patch;
}

}  // namespace ampci
