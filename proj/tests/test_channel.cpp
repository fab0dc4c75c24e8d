#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "ampci/channel.hpp"

using namespace ampci;

namespace {

double sample_variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST(GenerateMatrix, UnitColumnNorms) {
  for (auto [m, n, seed] : {std::tuple{3ul, 7ul, 1ull}, {50ul, 20ul, 2ull}, {64ul, 256ul, 99ull}}) {
    const auto s = generate_matrix(m, n, seed);
    ASSERT_EQ(s.matrix.rows(), static_cast<Eigen::Index>(m));
    ASSERT_EQ(s.matrix.cols(), static_cast<Eigen::Index>(n));
    for (Eigen::Index j = 0; j < s.matrix.cols(); ++j) EXPECT_NEAR(s.matrix.col(j).norm(), 1.0, 1e-10);
  }
}

TEST(GenerateMatrix, DeterministicPerSeed) {
  const auto a = generate_matrix(40, 60, 123);
  const auto b = generate_matrix(40, 60, 123);
  const auto c = generate_matrix(40, 60, 124);
  EXPECT_TRUE(a.matrix == b.matrix);
  EXPECT_FALSE(a.matrix == c.matrix);
}

TEST(GenerateMatrix, RejectsZeroDimensions) {
  EXPECT_THROW(generate_matrix(0, 5, 1), std::invalid_argument);
  EXPECT_THROW(generate_matrix(5, 0, 1), std::invalid_argument);
}

TEST(GenerateMatrix, LargeMatrixEntryStatistics) {
  const std::size_t m = 5000, n = 128 * 128;
  const Eigen::MatrixXd raw = detail::draw_gaussian_matrix(m, n, 2024);
  // Raw entries are N(0, 1/m): the standard error of their mean is
  // 1 / sqrt(m * n * m).
  const double bound = 3.0 / std::sqrt(static_cast<double>(m) * static_cast<double>(n) * static_cast<double>(m));
  EXPECT_LT(std::abs(raw.mean()), bound);
  const double var = (raw.array() - raw.mean()).square().mean();
  EXPECT_NEAR(var, 1.0 / static_cast<double>(m), 0.01 / static_cast<double>(m));
}

TEST(Measure, ZeroSignalGivesZero) {
  const auto s = generate_matrix(10, 20, 1);
  const std::vector<double> x(20, 0.0);
  EXPECT_EQ(measure(s, x, 9).norm(), 0.0);
}

TEST(Measure, BasisVectorSelectsColumn) {
  const auto s = generate_matrix(10, 20, 1);
  std::vector<double> x(20, 0.0);
  x[7] = 1.0;
  const Eigen::VectorXd y = measure(s, x, 9);
  EXPECT_EQ((y - s.matrix.col(7)).norm(), 0.0);
}

TEST(Measure, NoiseVariance) {
  auto s = generate_matrix(10000, 2, 1, 0.1);
  const std::vector<double> x(2, 0.0);
  const Eigen::VectorXd y = measure(s, x, 31);
  EXPECT_NEAR(sample_variance(std::vector<double>(y.data(), y.data() + y.size())), 0.01, 0.05 * 0.01);
}

TEST(Measure, LengthMismatch) {
  const auto s = generate_matrix(4, 8, 1);
  EXPECT_THROW(measure(s, std::vector<double>(7), 0), std::invalid_argument);
}

TEST(MeasureProperty, NoiselessIsLinear) {
  const auto s = generate_matrix(30, 50, 4);
  NormalRng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(50), z(50), comb(50);
    const double a = rng.normal(), b = rng.normal();
    for (std::size_t i = 0; i < 50; ++i) {
      x[i] = rng.normal();
      z[i] = rng.normal();
      comb[i] = a * x[i] + b * z[i];
    }
    const Eigen::VectorXd lhs = measure(s, comb, 0);
    const Eigen::VectorXd rhs = a * measure(s, x, 0) + b * measure(s, z, 0);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(ScalarChannel, ZeroSigmaIsIdentity) {
  const std::vector<double> x{0.1, -2.0, 3.5};
  EXPECT_EQ(scalar_channel(x, 0.0, 5), x);
}

TEST(ScalarChannel, UnitVariance) {
  const std::vector<double> x(100000, 0.0);
  EXPECT_NEAR(sample_variance(scalar_channel(x, 1.0, 17)), 1.0, 0.05);
}

TEST(ScalarChannel, SeededDeterminism) {
  const std::vector<double> x(1000, 0.5);
  EXPECT_EQ(scalar_channel(x, 0.2, 3), scalar_channel(x, 0.2, 3));
  EXPECT_NE(scalar_channel(x, 0.2, 3), scalar_channel(x, 0.2, 4));
}

TEST(ScalarChannel, NegativeSigma) {
  EXPECT_THROW(scalar_channel(std::vector<double>{1.0}, -0.1, 0), std::invalid_argument);
}

TEST(SystemFile, SaveLoadPreservesEverything) {
  const auto s = generate_matrix(7, 11, 42, 0.25);
  const auto path = std::filesystem::temp_directory_path() / "ampci_system_roundtrip.bin";
  save_system(s, path);
  const auto back = load_system(path);
  EXPECT_EQ(back.m, s.m);
  EXPECT_EQ(back.n, s.n);
  EXPECT_EQ(back.seed, s.seed);
  EXPECT_EQ(back.noise_std, s.noise_std);
  EXPECT_TRUE(back.matrix == s.matrix);
  EXPECT_EQ(std::filesystem::file_size(path), 4u + 4u + 3u * 8u + 8u + 7u * 11u * 8u);
  std::filesystem::remove(path);
}

TEST(SystemFile, HeaderLayout) {
  const auto s = generate_matrix(2, 3, 5, 0.5);
  const auto path = std::filesystem::temp_directory_path() / "ampci_system_header.bin";
  save_system(s, path);
  std::ifstream in(path, std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ASSERT_GE(bytes.size(), 40u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "AMPM");
  EXPECT_EQ(bytes[4], 1);  // version, little-endian
  EXPECT_EQ(bytes[8], 2);  // m
  EXPECT_EQ(bytes[16], 3); // n
  EXPECT_EQ(bytes[24], 5); // seed
  double noise;
  std::memcpy(&noise, bytes.data() + 32, 8);
  EXPECT_EQ(noise, 0.5);
  // first payload entry is A(0,0), second is A(0,1) (row-major)
  double a01;
  std::memcpy(&a01, bytes.data() + 40 + 8, 8);
  EXPECT_EQ(a01, s.matrix(0, 1));
  std::filesystem::remove(path);
}

TEST(SystemFile, RejectsBadMagic) {
  const auto path = std::filesystem::temp_directory_path() / "ampci_system_bad.bin";
  std::ofstream(path, std::ios::binary) << "XXXXjunk";
  EXPECT_THROW(load_system(path), std::runtime_error);
  std::filesystem::remove(path);
}
