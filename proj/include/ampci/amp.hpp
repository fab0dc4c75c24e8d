#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ampci/channel.hpp"
#include "ampci/denoisers.hpp"
#include "ampci/metrics.hpp"
#include "ampci/planes.hpp"
#include "ampci/wavelet.hpp"

namespace ampci {

inline constexpr double kDefaultWienerDamping = 0.1;

struct AmpConfig {
  int iterations = 30;
  // x^{t+1} = (1 - damping) * eta(q^t) + damping * x^t
  double damping = kDefaultWienerDamping;
  DenoiserSpec denoiser{};
  int wavelet_levels = kDefaultWaveletLevels;
  std::uint64_t seed = 0;
  // Image shape of the length-N signal; both zero means square.
  std::size_t image_rows = 0;
  std::size_t image_cols = 0;
  // Stop once ||x^{t+1} - x^t|| / ||x^t|| drops below this; 0 disables.
  double early_exit_tolerance = 0.0;

  void validate() const {
    if (iterations < 1) throw std::invalid_argument("AmpConfig: iterations must be >= 1");
    if (!(damping >= 0.0 && damping < 1.0)) throw std::invalid_argument("AmpConfig: damping must lie in [0,1)");
    if (wavelet_levels < 1) throw std::invalid_argument("AmpConfig: wavelet_levels must be >= 1");
    if (early_exit_tolerance < 0.0) throw std::invalid_argument("AmpConfig: negative early-exit tolerance");
  }
};

/// Damping recommended for each denoiser: the adaptive Wiener filter is not
/// separable and needs it; the others run undamped.
inline double default_damping(DenoiserKind kind) {
  return kind == DenoiserKind::wiener ? kDefaultWienerDamping : 0.0;
}

struct IterationRecord {
  int t = 0;                 // 1-based; x^t is the estimate this record describes
  double sigma2_hat = 0.0;   // noise estimate from r^{t-1}, used to produce x^t
  double onsager_avg = 0.0;  // <eta'> of the denoise that produced x^t
  double nmse_db = std::numeric_limits<double>::quiet_NaN();
  double elapsed_ms = 0.0;   // wall time of this iteration
};

struct AmpState {
  Eigen::VectorXd x;  // x^t, length N
  Eigen::VectorXd r;  // r^{t-1} until compute_residual runs, then r^t
  double sigma2 = 0.0;
  double onsager_avg = 0.0;
  int t = 0;
  std::vector<IterationRecord> history;
};

struct ReconstructionReport {
  ImagePlane estimate;
  std::vector<IterationRecord> history;
  AmpConfig config;
  double total_ms = 0.0;
};

/// x^0 = 0, r^{-1} = 0, no Onsager memory.
inline AmpState init_state(std::size_t n, std::size_t m) {
  if (n == 0 || m == 0) throw std::invalid_argument("init_state: dimensions must be positive");
  AmpState s;
  s.x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  s.r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  return s;
}

namespace detail {

inline void check_state(const MeasurementSystem& system, const AmpState& state) {
  if (static_cast<std::size_t>(state.x.size()) != system.n || static_cast<std::size_t>(state.r.size()) != system.m)
    throw std::invalid_argument("AMP state dimensions (" + std::to_string(state.x.size()) + ", " +
                                std::to_string(state.r.size()) + ") do not match system (n=" +
                                std::to_string(system.n) + ", m=" + std::to_string(system.m) + ")");
}

inline std::pair<std::size_t, std::size_t> image_shape(const AmpConfig& config, std::size_t n) {
  if (config.image_rows != 0 || config.image_cols != 0) {
    if (config.image_rows * config.image_cols != n)
      throw std::invalid_argument("AmpConfig: image shape does not match signal length " + std::to_string(n));
    return {config.image_rows, config.image_cols};
  }
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  if (side * side != n)
    throw std::invalid_argument("AmpConfig: signal length " + std::to_string(n) + " is not square; set image shape");
  return {side, side};
}

}  // namespace detail

/// r^t = y - A x^t + (N/M) r^{t-1} <eta'_{t-1}>. Updates state.r in place.
inline void compute_residual(const MeasurementSystem& system, const Eigen::VectorXd& y, AmpState& state) {
  detail::check_state(system, state);
  if (static_cast<std::size_t>(y.size()) != system.m) throw std::invalid_argument("compute_residual: y length != m");
  const double onsager_scale = state.onsager_avg / system.rate();
  Eigen::VectorXd r = y - system.matrix * state.x;
  if (onsager_scale != 0.0) r += onsager_scale * state.r;
  state.r = std::move(r);
}

/// Mean squared residual.
inline double estimate_noise(std::span<const double> residual) {
  if (residual.empty()) throw std::invalid_argument("estimate_noise: empty residual");
  return energy(residual) / static_cast<double>(residual.size());
}

inline double estimate_noise(const Eigen::VectorXd& residual) {
  return estimate_noise(std::span<const double>(residual.data(), static_cast<std::size_t>(residual.size())));
}

/// q^t = A^T r^t + x^t.
inline Eigen::VectorXd pseudo_data(const MeasurementSystem& system, const AmpState& state) {
  detail::check_state(system, state);
  return system.matrix.transpose() * state.r + state.x;
}

inline double onsager_average(std::span<const double> derivative) {
  if (derivative.empty()) throw std::invalid_argument("onsager_average: empty derivative grid");
  return std::accumulate(derivative.begin(), derivative.end(), 0.0) / static_cast<double>(derivative.size());
}

/// One AMP iteration in the wavelet domain. `truth`, when non-empty, adds
/// the NMSE of the new estimate to the history record.
inline void amp_step(const MeasurementSystem& system, const Eigen::VectorXd& y, AmpState& state,
                     const AmpConfig& config, std::span<const double> truth = {}) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto [rows, cols] = detail::image_shape(config, system.n);

  compute_residual(system, y, state);
  state.sigma2 = estimate_noise(state.r);

  const Eigen::VectorXd q = pseudo_data(system, state);
  CoeffPlane theta(rows, cols, config.wavelet_levels, std::vector<double>(q.data(), q.data() + q.size()));
  haar_forward_inplace(theta.coeffs, rows, cols, config.wavelet_levels);

  DenoiseResult d = denoise(theta, state.sigma2, config.denoiser);
  state.onsager_avg = onsager_average(d.derivative);
  haar_inverse_inplace(d.denoised.coeffs, rows, cols, config.wavelet_levels);

  Eigen::Map<const Eigen::VectorXd> eta(d.denoised.coeffs.data(), static_cast<Eigen::Index>(system.n));
  const double lambda = config.damping;
  if (lambda == 0.0)
    state.x = eta;
  else
    state.x = (1.0 - lambda) * eta + lambda * state.x;
  ++state.t;

  IterationRecord rec;
  rec.t = state.t;
  rec.sigma2_hat = state.sigma2;
  rec.onsager_avg = state.onsager_avg;
  if (!truth.empty())
    rec.nmse_db = nmse_db(truth, std::span<const double>(state.x.data(), static_cast<std::size_t>(state.x.size())));
  rec.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  state.history.push_back(rec);
}

/// Runs config.iterations AMP steps from the all-zero start.
inline ReconstructionReport reconstruct(const MeasurementSystem& system, const Eigen::VectorXd& y,
                                        const AmpConfig& config, const ImagePlane* truth = nullptr) {
  config.validate();
  AmpConfig cfg = config;
  if (truth != nullptr) {
    if (truth->size() != system.n) throw std::invalid_argument("reconstruct: truth size != n");
    cfg.image_rows = truth->rows;
    cfg.image_cols = truth->cols;
  }
  const auto [rows, cols] = detail::image_shape(cfg, system.n);
  const auto start = std::chrono::steady_clock::now();

  AmpState state = init_state(system.n, system.m);
  const std::span<const double> truth_view = truth ? truth->view() : std::span<const double>{};
  for (int it = 0; it < cfg.iterations; ++it) {
    const Eigen::VectorXd previous = cfg.early_exit_tolerance > 0.0 ? state.x : Eigen::VectorXd{};
    amp_step(system, y, state, cfg, truth_view);
    if (cfg.early_exit_tolerance > 0.0) {
      const double base = previous.norm();
      if (base > 0.0 && (state.x - previous).norm() / base < cfg.early_exit_tolerance) break;
    }
  }

  ReconstructionReport report;
  report.estimate = ImagePlane(rows, cols, std::vector<double>(state.x.data(), state.x.data() + state.x.size()));
  report.history = std::move(state.history);
  report.config = cfg;
  report.total_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace ampci
