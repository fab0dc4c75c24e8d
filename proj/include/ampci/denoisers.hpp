#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ampci/planes.hpp"

namespace ampci {

/// Denoised coefficients and d(eta)/d(theta) per coefficient, same shape.
struct DenoiseResult {
  CoeffPlane denoised;
  std::vector<double> derivative;
};

// ---------------------------------------------------------------------------
// Thresholding baselines

inline double soft_threshold(double u, double tau) {
  const double mag = std::abs(u) - tau;
  if (mag <= 0.0) return 0.0;
  return u > 0.0 ? mag : -mag;
}

inline double hard_threshold(double u, double tau) { return std::abs(u) > tau ? u : 0.0; }

// Both derivatives are the indicator of the pass region. For hard
// thresholding this ignores the Dirac spike at the jump.
inline double soft_threshold_derivative(double u, double tau) { return std::abs(u) > tau ? 1.0 : 0.0; }
inline double hard_threshold_derivative(double u, double tau) { return std::abs(u) > tau ? 1.0 : 0.0; }

// ---------------------------------------------------------------------------
// Amplitude-scale-invariant Bayes estimator

/// ((theta^2 - 3 sigma2)_+) / theta, with 0 at theta == 0.
inline double abe(double theta, double sigma2) {
  if (theta == 0.0) return 0.0;
  const double num = theta * theta - 3.0 * sigma2;
  return num > 0.0 ? num / theta : 0.0;
}

inline double abe_default_step(double theta) { return 1e-6 * std::max(std::abs(theta), 1.0); }

/// Central finite difference of abe(). Non-smooth at +-sqrt(3 sigma2); the
/// difference quotient is used there unchanged.
inline double abe_derivative(double theta, double sigma2, double step) {
  return (abe(theta + step, sigma2) - abe(theta - step, sigma2)) / (2.0 * step);
}

inline double abe_derivative(double theta, double sigma2) {
  return abe_derivative(theta, sigma2, abe_default_step(theta));
}

inline DenoiseResult abe_denoise(const CoeffPlane& coeffs, double sigma2) {
  if (sigma2 < 0.0) throw std::invalid_argument("abe_denoise: negative noise variance");
  DenoiseResult out{CoeffPlane(coeffs.rows, coeffs.cols, coeffs.levels), std::vector<double>(coeffs.size())};
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const double t = coeffs.coeffs[i];
    out.denoised.coeffs[i] = abe(t, sigma2);
    out.derivative[i] = abe_derivative(t, sigma2);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Adaptive Wiener filter

struct NeighborhoodMask {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> weights;  // row-major
  double normalizer = 1.0;

  double operator()(std::size_t r, std::size_t c) const { return weights[r * cols + c]; }

  /// Normalizer is the weight sum.
  static NeighborhoodMask from_weights(std::string name, std::size_t rows, std::size_t cols,
                                       std::vector<double> weights) {
    if (weights.size() != rows * cols) throw std::invalid_argument("NeighborhoodMask: weight count mismatch");
    if (rows % 2 == 0 || cols % 2 == 0)
      throw std::invalid_argument("NeighborhoodMask: dimensions must be odd, got " + std::to_string(rows) + "x" +
                                  std::to_string(cols));
    bool any_positive = false;
    for (double w : weights) {
      if (w < 0.0) throw std::invalid_argument("NeighborhoodMask: negative weight");
      any_positive = any_positive || w > 0.0;
    }
    if (!any_positive) throw std::invalid_argument("NeighborhoodMask: all weights zero");
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    return NeighborhoodMask{std::move(name), rows, cols, std::move(weights), sum};
  }
};

inline NeighborhoodMask ones_mask(std::size_t size) {
  return NeighborhoodMask::from_weights("ones" + std::to_string(size), size, size,
                                        std::vector<double>(size * size, 1.0));
}

/// The weighted 5x5 mask; its four corners are empty (weight 0), sum 27.
inline NeighborhoodMask weighted5_mask() {
  return NeighborhoodMask::from_weights("weighted5", 5, 5,
                                        {0, 1, 1, 1, 0,  //
                                         1, 1, 2, 1, 1,  //
                                         1, 2, 3, 2, 1,  //
                                         1, 1, 2, 1, 1,  //
                                         0, 1, 1, 1, 0});
}

inline std::vector<NeighborhoodMask> builtin_masks() { return {ones_mask(3), ones_mask(5), weighted5_mask()}; }

inline NeighborhoodMask mask_by_name(std::string_view name) {
  if (name == "ones3") return ones_mask(3);
  if (name == "ones5") return ones_mask(5);
  if (name == "weighted5") return weighted5_mask();
  throw std::invalid_argument("unknown mask '" + std::string(name) + "' (expected ones3, ones5, weighted5)");
}

/// Half-sample symmetric reflection (edge sample repeated): -1 -> 0, n -> n-1.
inline std::size_t mirror_index(std::ptrdiff_t i, std::size_t n) {
  const auto len = static_cast<std::ptrdiff_t>(n);
  while (i < 0 || i >= len) i = i < 0 ? -i - 1 : 2 * len - 1 - i;
  return static_cast<std::size_t>(i);
}

/// Weighted mean of squared coefficients over the mask centred at each
/// position, over the whole plane with mirrored borders.
inline std::vector<double> estimate_local_variance(const CoeffPlane& coeffs, const NeighborhoodMask& mask) {
  if (mask.rows % 2 == 0 || mask.cols % 2 == 0)
    throw std::invalid_argument("estimate_local_variance: mask dimensions must be odd");
  const auto hr = static_cast<std::ptrdiff_t>(mask.rows / 2);
  const auto hc = static_cast<std::ptrdiff_t>(mask.cols / 2);
  const std::size_t rows = coeffs.rows, cols = coeffs.cols;

  std::vector<double> sq(coeffs.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = coeffs.coeffs[i] * coeffs.coeffs[i];

  std::vector<double> out(coeffs.size(), 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t dr = -hr; dr <= hr; ++dr) {
        const std::size_t rr = mirror_index(static_cast<std::ptrdiff_t>(r) + dr, rows);
        for (std::ptrdiff_t dc = -hc; dc <= hc; ++dc) {
          const double w = mask(static_cast<std::size_t>(dr + hr), static_cast<std::size_t>(dc + hc));
          if (w == 0.0) continue;
          acc += w * sq[rr * cols + mirror_index(static_cast<std::ptrdiff_t>(c) + dc, cols)];
        }
      }
      out[r * cols + c] = acc / mask.normalizer;
    }
  }
  return out;
}

/// Shrinkage factor s / (s + sigma2) with s = max(local - sigma2, 0).
/// sigma2 == 0 is the noiseless pass-through (factor 1).
inline double wiener_factor(double local_variance, double sigma2) {
  if (sigma2 == 0.0) return 1.0;
  const double s = std::max(local_variance - sigma2, 0.0);
  const double denom = s + sigma2;
  return denom > 0.0 ? s / denom : 0.0;
}

/// What the Wiener filter reports as d(eta_i)/d(theta_i).
enum class WienerDerivative {
  // The shrinkage factor, treating the local variance as a constant.
  shrinkage,
  // Full diagonal derivative: the factor plus the contribution of theta_i
  // to its own local variance estimate.
  exact,
};

/// Total mask weight landing on the centre coefficient at each position
/// once borders are mirrored (the centre weight away from the borders).
inline std::vector<double> mask_self_weight(std::size_t rows, std::size_t cols, const NeighborhoodMask& mask) {
  const auto hr = static_cast<std::ptrdiff_t>(mask.rows / 2);
  const auto hc = static_cast<std::ptrdiff_t>(mask.cols / 2);
  std::vector<double> out(rows * cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t dr = -hr; dr <= hr; ++dr) {
        if (mirror_index(static_cast<std::ptrdiff_t>(r) + dr, rows) != r) continue;
        for (std::ptrdiff_t dc = -hc; dc <= hc; ++dc)
          if (mirror_index(static_cast<std::ptrdiff_t>(c) + dc, cols) == c)
            acc += mask(static_cast<std::size_t>(dr + hr), static_cast<std::size_t>(dc + hc));
      }
      out[r * cols + c] = acc;
    }
  return out;
}

inline DenoiseResult wiener_denoise(const CoeffPlane& coeffs, double sigma2, const NeighborhoodMask& mask,
                                    WienerDerivative mode = WienerDerivative::shrinkage) {
  if (sigma2 < 0.0) throw std::invalid_argument("wiener_denoise: negative noise variance");
  const auto local = estimate_local_variance(coeffs, mask);
  DenoiseResult out{CoeffPlane(coeffs.rows, coeffs.cols, coeffs.levels), std::vector<double>(coeffs.size())};
  std::vector<double> self;
  if (mode == WienerDerivative::exact) self = mask_self_weight(coeffs.rows, coeffs.cols, mask);
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const double t = coeffs.coeffs[i];
    const double v = local[i];
    const double f = wiener_factor(v, sigma2);
    out.denoised.coeffs[i] = f * t;
    out.derivative[i] = f;
    // d/dt [f(v) t] = f + t f'(v) dv/dt, f'(v) = sigma2 / v^2 where v > sigma2,
    // dv/dt = 2 t self / normalizer.
    if (mode == WienerDerivative::exact && sigma2 > 0.0 && v > sigma2)
      out.derivative[i] += 2.0 * t * t * sigma2 * self[i] / (mask.normalizer * v * v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Selection by name

enum class DenoiserKind { abe, wiener, soft, hard };

inline std::string_view to_string(DenoiserKind k) {
  switch (k) {
    case DenoiserKind::abe: return "abe";
    case DenoiserKind::wiener: return "wiener";
    case DenoiserKind::soft: return "soft";
    case DenoiserKind::hard: return "hard";
  }
  return "?";
}

inline DenoiserKind denoiser_kind_from_name(std::string_view name) {
  if (name == "abe") return DenoiserKind::abe;
  if (name == "wiener") return DenoiserKind::wiener;
  if (name == "soft") return DenoiserKind::soft;
  if (name == "hard") return DenoiserKind::hard;
  throw std::invalid_argument("unknown denoiser '" + std::string(name) + "' (expected abe, wiener, soft, hard)");
}

struct DenoiserSpec {
  DenoiserKind kind = DenoiserKind::wiener;
  std::string mask = "weighted5";
  // soft/hard threshold is threshold_scale * sqrt(sigma2).
  double threshold_scale = 1.0;
  // Leave the coarsest approximation band untouched (derivative 1 there).
  bool pass_approximation = false;
  // With the shrinkage-only form, AMP at damping 0.1 diverges on natural images.
  WienerDerivative wiener_derivative = WienerDerivative::exact;

  std::string label() const {
    return kind == DenoiserKind::wiener ? std::string(to_string(kind)) + "-" + mask : std::string(to_string(kind));
  }
};

inline DenoiseResult denoise(const CoeffPlane& coeffs, double sigma2, const DenoiserSpec& spec) {
  if (sigma2 < 0.0) throw std::invalid_argument("denoise: negative noise variance");
  DenoiseResult out;
  switch (spec.kind) {
    case DenoiserKind::abe:
      out = abe_denoise(coeffs, sigma2);
      break;
    case DenoiserKind::wiener:
      out = wiener_denoise(coeffs, sigma2, mask_by_name(spec.mask), spec.wiener_derivative);
      break;
    case DenoiserKind::soft:
    case DenoiserKind::hard: {
      const double tau = spec.threshold_scale * std::sqrt(sigma2);
      const bool soft = spec.kind == DenoiserKind::soft;
      out = DenoiseResult{CoeffPlane(coeffs.rows, coeffs.cols, coeffs.levels), std::vector<double>(coeffs.size())};
      for (std::size_t i = 0; i < coeffs.size(); ++i) {
        const double u = coeffs.coeffs[i];
        out.denoised.coeffs[i] = soft ? soft_threshold(u, tau) : hard_threshold(u, tau);
        out.derivative[i] = soft ? soft_threshold_derivative(u, tau) : hard_threshold_derivative(u, tau);
      }
      break;
    }
  }
  if (spec.pass_approximation) {
    for (std::size_t r = 0; r < coeffs.approx_rows(); ++r)
      for (std::size_t c = 0; c < coeffs.approx_cols(); ++c) {
        out.denoised(r, c) = coeffs(r, c);
        out.derivative[r * coeffs.cols + c] = 1.0;
      }
  }
  return out;
}

}  // namespace ampci
