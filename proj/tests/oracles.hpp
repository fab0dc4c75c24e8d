#pragma once

// Reference computations used only by the tests. They are written against
// the textbook definitions (explicit matrices, plain loops) and share no code
// with the library beyond plain data types.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

/// Single-level 1-D Haar analysis matrix: lows in the first half.
inline Eigen::MatrixXd haar_1d(std::size_t n) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const double s = 1.0 / std::sqrt(2.0);
  const auto half = static_cast<Eigen::Index>(n / 2);
  for (Eigen::Index i = 0; i < half; ++i) {
    h(i, 2 * i) = s;
    h(i, 2 * i + 1) = s;
    h(half + i, 2 * i) = s;
    h(half + i, 2 * i + 1) = -s;
  }
  return h;
}

/// Explicit N x N analysis matrix of the nested multi-level 2-D Haar
/// transform acting on row-major vectorized grids.
inline Eigen::MatrixXd haar_matrix(std::size_t rows, std::size_t cols, int levels) {
  const auto n = static_cast<Eigen::Index>(rows * cols);
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(n, n);
  std::size_t h = rows, wd = cols;
  for (int l = 0; l < levels; ++l) {
    const Eigen::MatrixXd hr = haar_1d(h), hc = haar_1d(wd);
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t c = 0; c < wd; ++c) {
        const auto out = static_cast<Eigen::Index>(r * cols + c);
        p.row(out).setZero();
        for (std::size_t a = 0; a < h; ++a)
          for (std::size_t b = 0; b < wd; ++b)
            p(out, static_cast<Eigen::Index>(a * cols + b)) =
                hr(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(a)) *
                hc(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(b));
      }
    w = p * w;
    h /= 2;
    wd /= 2;
  }
  return w;
}

/// Brute-force weighted neighbourhood mean of squares with an explicitly
/// padded (edge-repeating symmetric) copy of the grid.
inline std::vector<double> local_variance(const std::vector<double>& grid, std::size_t rows, std::size_t cols,
                                          const std::vector<double>& mask, std::size_t mrows, std::size_t mcols) {
  const std::size_t pr = mrows / 2, pc = mcols / 2;
  const std::size_t prow = rows + 2 * pr, pcol = cols + 2 * pc;
  auto reflect = [](long i, long n) {
    // period 2n sequence 0..n-1, n-1..0
    long m = ((i % (2 * n)) + 2 * n) % (2 * n);
    return m < n ? m : 2 * n - 1 - m;
  };
  std::vector<double> padded(prow * pcol);
  for (std::size_t r = 0; r < prow; ++r)
    for (std::size_t c = 0; c < pcol; ++c) {
      const long sr = reflect(static_cast<long>(r) - static_cast<long>(pr), static_cast<long>(rows));
      const long sc = reflect(static_cast<long>(c) - static_cast<long>(pc), static_cast<long>(cols));
      const double v = grid[static_cast<std::size_t>(sr) * cols + static_cast<std::size_t>(sc)];
      padded[r * pcol + c] = v * v;
    }
  double norm = 0.0;
  for (double w : mask) norm += w;
  std::vector<double> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < mrows; ++i)
        for (std::size_t j = 0; j < mcols; ++j) acc += mask[i * mcols + j] * padded[(r + i) * pcol + (c + j)];
      out[r * cols + c] = acc / norm;
    }
  return out;
}

enum class Eta { abe, wiener, soft, hard };

struct StepResult {
  Eigen::VectorXd x_next;
  Eigen::VectorXd r;
  double sigma2 = 0.0;
  double onsager = 0.0;
};

/// One damped wavelet-domain AMP iteration written out line by line.
inline StepResult amp_step(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& r_prev, double onsager_prev, double lambda, Eta eta,
                           const std::vector<double>& mask, std::size_t mside, std::size_t rows, std::size_t cols,
                           int levels, double threshold_scale = 1.0, bool wiener_exact = true) {
  const double m = static_cast<double>(a.rows());
  const double n = static_cast<double>(a.cols());
  const Eigen::MatrixXd w = haar_matrix(rows, cols, levels);

  StepResult out;
  out.r = y - a * x + (n / m) * onsager_prev * r_prev;
  out.sigma2 = out.r.squaredNorm() / m;
  const Eigen::VectorXd q = a.transpose() * out.r + x;
  const Eigen::VectorXd theta = w * q;

  const double s2 = out.sigma2;
  const double tau = threshold_scale * std::sqrt(s2);
  auto abe = [&](double t) { return t == 0.0 ? 0.0 : std::max(t * t - 3.0 * s2, 0.0) / t; };

  Eigen::VectorXd den(theta.size()), der(theta.size());
  std::vector<double> local;
  if (eta == Eta::wiener)
    local = local_variance(std::vector<double>(theta.data(), theta.data() + theta.size()), rows, cols, mask, mside,
                           mside);
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double t = theta[i];
    switch (eta) {
      case Eta::abe: {
        const double h = 1e-6 * std::max(std::abs(t), 1.0);
        den[i] = abe(t);
        der[i] = (abe(t + h) - abe(t - h)) / (2.0 * h);
        break;
      }
      case Eta::wiener: {
        const double sv = std::max(local[static_cast<std::size_t>(i)] - s2, 0.0);
        const double f = s2 == 0.0 ? 1.0 : (sv + s2 > 0.0 ? sv / (sv + s2) : 0.0);
        den[i] = f * t;
        der[i] = f;
        const double v = local[static_cast<std::size_t>(i)];
        if (wiener_exact && s2 > 0.0 && v > s2) {
          // weight of theta_i in its own window, read off an impulse at i
          std::vector<double> impulse(static_cast<std::size_t>(theta.size()), 0.0);
          impulse[static_cast<std::size_t>(i)] = 1.0;
          double norm = 0.0;
          for (double wv : mask) norm += wv;
          const double self =
              norm * local_variance(impulse, rows, cols, mask, mside, mside)[static_cast<std::size_t>(i)];
          der[i] += t * (s2 / (v * v)) * (2.0 * t * self / norm);
        }
        break;
      }
      case Eta::soft:
        den[i] = std::abs(t) > tau ? (t > 0 ? t - tau : t + tau) : 0.0;
        der[i] = std::abs(t) > tau ? 1.0 : 0.0;
        break;
      case Eta::hard:
        den[i] = std::abs(t) > tau ? t : 0.0;
        der[i] = std::abs(t) > tau ? 1.0 : 0.0;
        break;
    }
  }
  out.onsager = der.mean();
  out.x_next = (1.0 - lambda) * (w.transpose() * den) + lambda * x;
  return out;
}

}  // namespace oracle
