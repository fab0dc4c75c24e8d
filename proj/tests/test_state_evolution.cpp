#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ampci/state_evolution.hpp"

using namespace ampci;

namespace {

double phi(double w) { return std::exp(-0.5 * w * w) / std::sqrt(2.0 * std::numbers::pi); }

// E[(soft(X + s W, s) - X)^2] for X ~ (1-eps) delta_0 + eps N(0, a^2), by
// trapezoid quadrature over (x, w).
double soft_mse_bg(double s2, double eps, double a) {
  const double s = std::sqrt(s2);
  auto soft = [s](double u) { return std::abs(u) > s ? u - std::copysign(s, u) : 0.0; };
  const int k = 1601;
  const double lim = 9.0, h = 2.0 * lim / (k - 1);
  double zero = 0.0, active = 0.0;
  for (int j = 0; j < k; ++j) {
    const double w = -lim + j * h;
    const double ww = (j == 0 || j == k - 1 ? 0.5 : 1.0) * phi(w) * h;
    const double e0 = soft(s * w);
    zero += ww * e0 * e0;
    for (int i = 0; i < k; ++i) {
      const double z = -lim + i * h;
      const double wz = (i == 0 || i == k - 1 ? 0.5 : 1.0) * phi(z) * h;
      const double x = a * z;
      const double e = soft(x + s * w) - x;
      active += ww * wz * e * e;
    }
  }
  return (1.0 - eps) * zero + eps * active;
}

}  // namespace

TEST(SePrior, Validation) {
  SePriorSpec p;
  p.rate = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.sparsity = 1.5;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.kind = SePriorSpec::Kind::empirical;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.noise_var = -1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(SePrior, TwoPointMoments) {
  SePriorSpec p;
  p.kind = SePriorSpec::Kind::two_point;
  p.sparsity = 0.2;
  p.amplitude = 3.0;
  NormalRng rng(1);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = p.sample(rng);
    EXPECT_TRUE(x == 0.0 || x == 3.0);
    sum += x * x;
  }
  EXPECT_NEAR(sum / n, 0.2 * 9.0, 0.05);
}

TEST(SeOracle, InitialVarianceFromSecondMoment) {
  SePriorSpec p;
  p.kind = SePriorSpec::Kind::two_point;
  p.sparsity = 1.0;
  p.amplitude = 2.0;
  p.rate = 0.25;
  p.noise_var = 0.5;
  const auto tr = se_oracle(p, [](double q, double) { return q; }, 0, 10, 1);
  ASSERT_EQ(tr.sigma2.size(), 1u);
  EXPECT_DOUBLE_EQ(tr.sigma2[0], 0.5 + 4.0 / 0.25);
  EXPECT_EQ(tr.std_error[0], 0.0);
}

TEST(SeOracle, IdentityDenoiserFollowsLinearRecursion) {
  SePriorSpec p;
  p.rate = 0.5;
  p.noise_var = 0.01;
  const auto tr = se_oracle(p, [](double q, double) { return q; }, 4, 200000, 3);
  ASSERT_EQ(tr.sigma2.size(), 5u);
  for (std::size_t t = 0; t + 1 < tr.sigma2.size(); ++t) {
    const double expect = p.noise_var + tr.sigma2[t] / p.rate;
    EXPECT_NEAR(tr.sigma2[t + 1], expect, 3.0 * tr.std_error[t + 1]) << "t=" << t;
  }
}

TEST(SeOracle, PerfectDenoiserReachesNoiseFloor) {
  SePriorSpec p;
  p.noise_var = 0.02;
  const auto tr = se_oracle(p, [](double, double, double x) { return x; }, 3, 1000, 4);
  for (std::size_t t = 1; t < tr.sigma2.size(); ++t) {
    EXPECT_EQ(tr.sigma2[t], 0.02);
    EXPECT_EQ(tr.std_error[t], 0.0);
  }
}

TEST(SeOracle, Deterministic) {
  SePriorSpec p;
  const auto eta = scalar_denoiser(DenoiserSpec{DenoiserKind::abe});
  const auto a = se_oracle(p, eta, 5, 5000, 9);
  const auto b = se_oracle(p, eta, 5, 5000, 9);
  EXPECT_EQ(a.sigma2, b.sigma2);
}

TEST(SeOracle, BadArguments) {
  SePriorSpec p;
  auto eta = [](double q, double) { return q; };
  EXPECT_THROW(se_oracle(p, eta, 3, 0, 1), std::invalid_argument);
  EXPECT_THROW(se_oracle(p, eta, -1, 10, 1), std::invalid_argument);
}

TEST(SeOracle, ScalarDenoiserForms) {
  DenoiserSpec spec{DenoiserKind::soft};
  spec.threshold_scale = 2.0;
  EXPECT_DOUBLE_EQ(scalar_denoiser(spec)(3.0, 0.25), 2.0);
  spec.kind = DenoiserKind::hard;
  EXPECT_EQ(scalar_denoiser(spec)(0.9, 0.25), 0.0);
  EXPECT_DOUBLE_EQ(scalar_denoiser(DenoiserSpec{DenoiserKind::abe})(2.0, 1.0), 0.5);
  EXPECT_THROW(scalar_denoiser(DenoiserSpec{DenoiserKind::wiener}), std::invalid_argument);
}

TEST(SeOracle, SoftThresholdMatchesQuadrature) {
  SePriorSpec p;
  p.sparsity = 0.1;
  p.amplitude = 1.0;
  p.rate = 0.5;
  const auto eta = scalar_denoiser(DenoiserSpec{DenoiserKind::soft});
  const auto tr = se_oracle(p, eta, 6, 400000, 11);
  EXPECT_NEAR(tr.sigma2[0], 0.1 / 0.5, 3.0 * tr.std_error[0]);
  for (std::size_t t = 0; t + 1 < tr.sigma2.size(); ++t) {
    // conditional on the Monte Carlo sigma2[t]
    const double expect = soft_mse_bg(tr.sigma2[t], p.sparsity, p.amplitude) / p.rate;
    EXPECT_NEAR(tr.sigma2[t + 1], expect, 3.0 * tr.std_error[t + 1] + 1e-6) << "t=" << t;
  }
  // soft thresholding at tau = sigma contracts here
  EXPECT_LT(tr.sigma2.back(), tr.sigma2.front());
}
