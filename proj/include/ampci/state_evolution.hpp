#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "ampci/denoisers.hpp"
#include "ampci/rng.hpp"

namespace ampci {

/// Signal prior X ~ f_X plus the channel parameters the recursion needs.
struct SePriorSpec {
  enum class Kind { bernoulli_gaussian, two_point, empirical };

  Kind kind = Kind::bernoulli_gaussian;
  // bernoulli_gaussian: X = N(0, amplitude^2) with probability sparsity, else 0.
  // two_point: X = amplitude with probability sparsity, else 0.
  double sparsity = 0.1;
  double amplitude = 1.0;
  // empirical: X drawn uniformly from these values (e.g. image coefficients).
  std::vector<double> values;
  double rate = 0.5;       // R = M / N
  double noise_var = 0.0;  // sigma_z^2

  void validate() const {
    if (!(rate > 0.0)) throw std::invalid_argument("SePriorSpec: rate must be positive");
    if (noise_var < 0.0) throw std::invalid_argument("SePriorSpec: negative noise variance");
    if (kind != Kind::empirical && (sparsity < 0.0 || sparsity > 1.0))
      throw std::invalid_argument("SePriorSpec: sparsity outside [0,1]");
    if (kind == Kind::empirical && values.empty()) throw std::invalid_argument("SePriorSpec: empty empirical sample");
  }

  double sample(NormalRng& rng) const {
    switch (kind) {
      case Kind::bernoulli_gaussian: {
        const bool active = rng.uniform() < sparsity;
        const double g = rng.normal();
        return active ? amplitude * g : 0.0;
      }
      case Kind::two_point:
        return rng.uniform() < sparsity ? amplitude : 0.0;
      case Kind::empirical: {
        const auto idx = static_cast<std::size_t>(rng.uniform() * static_cast<double>(values.size()));
        return values[idx < values.size() ? idx : values.size() - 1];
      }
    }
    return 0.0;
  }
};

/// sigma2[t] for t = 0..T and the Monte Carlo standard error of each entry.
struct SeTrajectory {
  std::vector<double> sigma2;
  std::vector<double> std_error;
};

namespace detail {

template <typename Eta>
double apply_scalar(const Eta& eta, double q, double sigma2, double x) {
  if constexpr (std::is_invocable_r_v<double, const Eta&, double, double, double>)
    return eta(q, sigma2, x);  // oracle-aware denoiser
  else
    return eta(q, sigma2);
}

}  // namespace detail

/// Monte Carlo state evolution:
///   sigma2_0     = sigma_z^2 + E[X^2] / R
///   sigma2_{t+1} = sigma_z^2 + E[(eta(X + sigma_t W) - X)^2] / R
/// `eta` is called as eta(q, sigma2) or, if it accepts it, eta(q, sigma2, x).
template <typename Eta>
SeTrajectory se_oracle(const SePriorSpec& prior, const Eta& eta, int iterations, std::size_t samples,
                       std::uint64_t seed) {
  prior.validate();
  if (samples < 1) throw std::invalid_argument("se_oracle: samples must be >= 1");
  if (iterations < 0) throw std::invalid_argument("se_oracle: negative iteration count");
  NormalRng rng(seed);
  const double inv_rate = 1.0 / prior.rate;
  const auto n = static_cast<double>(samples);

  auto record = [&](SeTrajectory& out, double sum, double sum_sq) {
    const double mean = sum / n;
    const double var = samples > 1 ? std::max(sum_sq / n - mean * mean, 0.0) * n / (n - 1.0) : 0.0;
    out.sigma2.push_back(prior.noise_var + inv_rate * mean);
    out.std_error.push_back(inv_rate * std::sqrt(var / n));
  };

  SeTrajectory out;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = prior.sample(rng);
    sum += x * x;
    sum_sq += x * x * x * x;
  }
  record(out, sum, sum_sq);

  for (int t = 0; t < iterations; ++t) {
    const double s2 = out.sigma2.back();
    const double sd = std::sqrt(s2);
    sum = sum_sq = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
      const double x = prior.sample(rng);
      const double q = x + sd * rng.normal();
      const double e = detail::apply_scalar(eta, q, s2, x) - x;
      sum += e * e;
      sum_sq += e * e * e * e;
    }
    record(out, sum, sum_sq);
  }
  return out;
}

/// Scalar form of a separable denoiser spec for se_oracle. The adaptive
/// Wiener filter depends on neighbours and has no scalar form.
inline std::function<double(double, double)> scalar_denoiser(const DenoiserSpec& spec) {
  const double k = spec.threshold_scale;
  switch (spec.kind) {
    case DenoiserKind::abe:
      return [](double q, double s2) { return abe(q, s2); };
    case DenoiserKind::soft:
      return [k](double q, double s2) { return soft_threshold(q, k * std::sqrt(s2)); };
    case DenoiserKind::hard:
      return [k](double q, double s2) { return hard_threshold(q, k * std::sqrt(s2)); };
    case DenoiserKind::wiener:
      break;
  }
  throw std::invalid_argument("scalar_denoiser: the adaptive Wiener filter is not separable");
}

}  // namespace ampci
