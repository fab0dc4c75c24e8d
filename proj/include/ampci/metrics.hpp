#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

#include "ampci/planes.hpp"

namespace ampci {

/// Reported in place of -inf when the estimate is exact.
inline constexpr double kNmseFloorDb = -300.0;

/// 10 log10(||x - xhat||^2 / ||x||^2), clamped below at kNmseFloorDb.
inline double nmse_db(std::span<const double> x, std::span<const double> xhat) {
  if (x.size() != xhat.size()) throw std::invalid_argument("nmse: shape mismatch");
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - xhat[i];
    err += d * d;
    ref += x[i] * x[i];
  }
  if (ref <= 0.0) throw std::invalid_argument("nmse: reference signal has zero energy");
  if (err == 0.0) return kNmseFloorDb;
  return std::max(10.0 * std::log10(err / ref), kNmseFloorDb);
}

inline double nmse_db(const ImagePlane& x, const ImagePlane& xhat) {
  if (x.rows != xhat.rows || x.cols != xhat.cols) throw std::invalid_argument("nmse: shape mismatch");
  return nmse_db(x.view(), xhat.view());
}

}  // namespace ampci
