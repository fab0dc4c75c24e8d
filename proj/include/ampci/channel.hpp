#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ampci/rng.hpp"

namespace ampci {

/// Dense sensing matrix A (M x N) for y = A x + z.
struct MeasurementSystem {
  Eigen::MatrixXd matrix;
  std::size_t m = 0;
  std::size_t n = 0;
  double noise_std = 0.0;
  std::uint64_t seed = 0;

  double rate() const { return static_cast<double>(m) / static_cast<double>(n); }

  /// Wraps an explicit matrix; no normalization is applied.
  static MeasurementSystem from_matrix(Eigen::MatrixXd a, double noise_std = 0.0) {
    if (a.rows() == 0 || a.cols() == 0) throw std::invalid_argument("MeasurementSystem: empty matrix");
    if (noise_std < 0.0) throw std::invalid_argument("MeasurementSystem: negative noise_std");
    MeasurementSystem s;
    s.m = static_cast<std::size_t>(a.rows());
    s.n = static_cast<std::size_t>(a.cols());
    s.matrix = std::move(a);
    s.noise_std = noise_std;
    return s;
  }
};

namespace detail {

// i.i.d. N(0, 1/m) entries, drawn column by column.
inline Eigen::MatrixXd draw_gaussian_matrix(std::size_t m, std::size_t n, std::uint64_t seed) {
  NormalRng rng(seed);
  Eigen::MatrixXd a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  const double sd = 1.0 / std::sqrt(static_cast<double>(m));
  double* p = a.data();
  for (std::size_t k = 0, total = m * n; k < total; ++k) p[k] = sd * rng.normal();
  return a;
}

}  // namespace detail

/// Gaussian sensing matrix with unit-norm columns. Deterministic in `seed`.
inline MeasurementSystem generate_matrix(std::size_t m, std::size_t n, std::uint64_t seed,
                                         double noise_std = 0.0) {
  if (m == 0 || n == 0)
    throw std::invalid_argument("generate_matrix: dimensions must be positive (m=" + std::to_string(m) +
                                ", n=" + std::to_string(n) + ")");
  if (noise_std < 0.0) throw std::invalid_argument("generate_matrix: negative noise_std");
  MeasurementSystem s;
  s.m = m;
  s.n = n;
  s.seed = seed;
  s.noise_std = noise_std;
  s.matrix = detail::draw_gaussian_matrix(m, n, seed);
  for (Eigen::Index j = 0; j < s.matrix.cols(); ++j) {
    const double norm = s.matrix.col(j).norm();
    if (norm > 0.0) s.matrix.col(j) /= norm;
  }
  return s;
}

/// y = A x + z, z ~ N(0, noise_std^2) drawn from `seed`.
inline Eigen::VectorXd measure(const MeasurementSystem& system, std::span<const double> x, std::uint64_t seed) {
  if (x.size() != system.n)
    throw std::invalid_argument("measure: signal length " + std::to_string(x.size()) + " != n=" +
                                std::to_string(system.n));
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::VectorXd y = system.matrix * xv;
  if (system.noise_std > 0.0) {
    NormalRng rng(seed);
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += system.noise_std * rng.normal();
  }
  return y;
}

/// q = x + v, v ~ N(0, sigma^2).
inline std::vector<double> scalar_channel(std::span<const double> x, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw std::invalid_argument("scalar_channel: negative sigma");
  std::vector<double> q(x.begin(), x.end());
  if (sigma == 0.0) return q;
  NormalRng rng(seed);
  for (double& v : q) v += sigma * rng.normal();
  return q;
}

// Binary layout (all little-endian): "AMPM", u32 version, u64 m, u64 n,
// u64 seed, f64 noise_std, then m*n f64 entries in row-major order.
inline constexpr std::array<char, 4> kMatrixMagic{'A', 'M', 'P', 'M'};
inline constexpr std::uint32_t kMatrixFormatVersion = 1;

namespace detail {

template <typename T>
void write_le(std::ostream& out, T value) {
  auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
  if (!in) throw std::runtime_error("load_system: truncated file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

}  // namespace detail

inline void save_system(const MeasurementSystem& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_system: cannot open " + path.string());
  out.write(kMatrixMagic.data(), kMatrixMagic.size());
  detail::write_le<std::uint32_t>(out, kMatrixFormatVersion);
  detail::write_le<std::uint64_t>(out, s.m);
  detail::write_le<std::uint64_t>(out, s.n);
  detail::write_le<std::uint64_t>(out, s.seed);
  detail::write_le<double>(out, s.noise_std);
  for (Eigen::Index i = 0; i < s.matrix.rows(); ++i)
    for (Eigen::Index j = 0; j < s.matrix.cols(); ++j) detail::write_le<double>(out, s.matrix(i, j));
  if (!out) throw std::runtime_error("save_system: write failed for " + path.string());
}

inline MeasurementSystem load_system(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_system: cannot open " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMatrixMagic) throw std::runtime_error("load_system: bad magic in " + path.string());
  const auto version = detail::read_le<std::uint32_t>(in);
  if (version != kMatrixFormatVersion)
    throw std::runtime_error("load_system: unsupported version " + std::to_string(version));
  MeasurementSystem s;
  s.m = detail::read_le<std::uint64_t>(in);
  s.n = detail::read_le<std::uint64_t>(in);
  s.seed = detail::read_le<std::uint64_t>(in);
  s.noise_std = detail::read_le<double>(in);
  if (s.m == 0 || s.n == 0) throw std::runtime_error("load_system: zero dimension");
  s.matrix.resize(static_cast<Eigen::Index>(s.m), static_cast<Eigen::Index>(s.n));
  for (Eigen::Index i = 0; i < s.matrix.rows(); ++i)
    for (Eigen::Index j = 0; j < s.matrix.cols(); ++j) s.matrix(i, j) = detail::read_le<double>(in);
  return s;
}

}  // namespace ampci
