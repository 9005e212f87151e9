#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "secopt/oracles.hpp"
#include "secopt/stats.hpp"

namespace secopt {
namespace {

TEST(SignOracle, Examples) {
  const auto f = make_abs(0.5);
  EXPECT_EQ(sign_oracle(f, 0.3).sign_value(), -1);
  EXPECT_EQ(sign_oracle(f, 0.8).sign_value(), 1);
  EXPECT_EQ(sign_oracle(f, 0.5).sign_value(), 1);
}

TEST(SignOracle, RejectsMultiDimensional) {
  const auto f = make_uniformly_convex(2.0, 1.0, Point{0.5, 0.5});
  EXPECT_THROW(sign_oracle(f, 0.3), UnsupportedError);
}

TEST(SignOracle, ResponseKindIsExclusive) {
  const auto r = sign_oracle(make_abs(0.5), 0.2);
  EXPECT_EQ(r.kind(), OracleResponse::Kind::Sign);
  EXPECT_THROW((void)r.value(), ProtocolOrderError);
  EXPECT_THROW((void)r.gradient(), ProtocolOrderError);
}

TEST(NoisySignOracle, DegenerateNoiseMatchesExact) {
  const auto f = make_abs(0.5);
  RngStream rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double x = rng.uniform();
    ASSERT_EQ(noisy_sign_oracle(f, x, 1.0 - 1e-12, rng).sign_value(), sign_oracle(f, x).sign_value());
  }
}

TEST(NoisySignOracle, FlipRate) {
  const auto f = make_abs(0.5);
  RngStream rng(2);
  const int n = 100000;
  int minus = 0;
  for (int i = 0; i < n; ++i) minus += noisy_sign_oracle(f, 0.3, 0.75, rng).sign_value() == -1;
  const double freq = static_cast<double>(minus) / n;
  EXPECT_GE(freq, 0.745);
  EXPECT_LE(freq, 0.755);
  EXPECT_LE(std::abs((1.0 - freq) - 0.25), 3.0 * stats::binomial_se(0.25, n));
}

TEST(NoisySignOracle, GoldenSequence) {
  const auto f = make_abs(0.5);
  RngStream rng(42, 0);
  std::vector<int> got;
  for (int i = 0; i < 5; ++i) got.push_back(noisy_sign_oracle(f, 0.3, 0.75, rng).sign_value());
  EXPECT_EQ(got, (std::vector<int>{-1, 1, -1, -1, -1}));
}

TEST(NoisySignOracle, RejectsBadP) {
  const auto f = make_abs(0.5);
  RngStream rng(1);
  EXPECT_THROW(noisy_sign_oracle(f, 0.3, 0.5, rng), ParameterError);
  EXPECT_THROW(noisy_sign_oracle(f, 0.3, 1.0, rng), ParameterError);
}

TEST(GaussianFirstOrder, ZeroNoiseIsExact) {
  const auto f = make_uniformly_convex(2.0, 1.0, 0.5);
  RngStream rng(3);
  const auto r = gaussian_first_order(f, 0.7, 0.0, rng);
  EXPECT_EQ(r.value(), f.eval(0.7));
  EXPECT_EQ(r.gradient()[0], f.subgrad(0.7));
}

TEST(GaussianFirstOrder, SampleMoments) {
  const auto f = make_uniformly_convex(2.0, 1.0, 0.5);
  RngStream rng(4);
  std::vector<double> y1, y2, z;
  for (int i = 0; i < 100000; ++i) {
    const auto r = gaussian_first_order(f, 0.7, 0.1, rng);
    y1.push_back(r.value());
    y2.push_back(r.gradient()[0]);
  }
  EXPECT_NEAR(stats::mean(y1), 0.02, 0.001);
  EXPECT_GE(stats::stddev(y1), 0.098);
  EXPECT_LE(stats::stddev(y1), 0.102);
  EXPECT_NEAR(stats::mean(y2), 0.2, 0.001);
  for (int i = 0; i < 10000; ++i) z.push_back((y1[static_cast<std::size_t>(i)] - 0.02) / 0.1);
  EXPECT_LT(stats::ks_statistic_normal(z), stats::ks_critical_1pct(z.size()));
}

TEST(GaussianFirstOrder, Deterministic) {
  const auto f = make_uniformly_convex(2.0, 1.0, Point{0.4, 0.6});
  RngStream a(77, 5), b(77, 5);
  const Point x{0.1, 0.9};
  for (int i = 0; i < 100; ++i) ASSERT_EQ(gaussian_first_order(f, x, 0.3, a), gaussian_first_order(f, x, 0.3, b));
}

TEST(GaussianFirstOrder, RejectsNegativeSigma) {
  RngStream rng(1);
  EXPECT_THROW(gaussian_first_order(make_abs(0.5), 0.2, -1.0, rng), ParameterError);
}

}  // namespace
}  // namespace secopt
