#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "secopt/adversary.hpp"
#include "secopt/stats.hpp"

namespace secopt {
namespace {

double se(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

TEST(Proportional, UniformOverQueries) {
  const PublicView view({0.1, 0.5, 0.9});
  RngStream rng(11);
  std::array<double, 3> counts{};
  const int draws = 30000;
  for (int i = 0; i < draws; ++i) {
    const double x = proportional_sample(view, rng).point;
    counts[x == 0.1 ? 0 : x == 0.5 ? 1 : 2] += 1.0;
  }
  EXPECT_LT(stats::chi_square_uniform(counts), 9.21);  // df 2, 1% level
}

TEST(Proportional, SingleQueryAndEmpty) {
  RngStream rng(1);
  const PublicView one({0.4});
  for (int i = 0; i < 10; ++i) EXPECT_EQ(proportional_sample(one, rng).point, 0.4);
  EXPECT_THROW(proportional_sample(PublicView{}, rng), InputError);
}

TEST(PackingBall, Centers) {
  const auto c = packing_centers(0.1);
  ASSERT_EQ(c.size(), 5u);
  EXPECT_NEAR(c.front(), 0.1, 1e-15);
  EXPECT_NEAR(c.back(), 0.9, 1e-15);
}

TEST(PackingBall, HalfTheQueriesInOneBall) {
  // T = 4, two queries inside B(0.1, 0.1)
  const PublicView view({0.05, 0.15, 0.5, 0.9});
  const std::vector<double> centers{0.1};
  RngStream rng(2);
  int hits = 0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) hits += packing_ball_sample(view, 0.1, centers, rng).point == 0.1;
  EXPECT_NEAR(hits / static_cast<double>(draws), 0.5, 3 * se(0.5, draws));
}

TEST(PackingBall, AllInsideOneBall) {
  const PublicView view({0.31, 0.29, 0.3});
  const auto centers = packing_centers(0.1);
  RngStream rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto est = packing_ball_sample(view, 0.1, centers, rng);
    EXPECT_NEAR(est.point, 0.3, 1e-15);
    EXPECT_FALSE(est.fallback);
  }
}

TEST(PackingBall, NoQueryInAnyBallActsProportional) {
  const PublicView view({0.5, 0.55});
  const std::vector<double> centers{0.1, 0.9};
  RngStream a(4), b(4);
  for (int i = 0; i < 100; ++i) {
    const auto est = packing_ball_sample(view, 0.1, centers, a);
    EXPECT_TRUE(est.fallback);
    EXPECT_EQ(est.point, proportional_sample(view, b).point);
  }
}

TEST(PackingBall, OverlapIsAnError) {
  RngStream rng(1);
  const std::vector<double> centers{0.1, 0.25};
  EXPECT_THROW(packing_ball_sample(PublicView({0.1}), 0.1, centers, rng), PackingError);
}

TEST(PosteriorDensity, IntegratesToOne) {
  const std::vector<double> replicas{0.05, 0.35, 0.65};
  const double eps = 0.01, delta = 0.1;
  const int n = 200000;
  double mass = 0.0;
  for (int i = 0; i < n; ++i) mass += posterior_density((i + 0.5) / n, replicas, eps, delta) / n;
  EXPECT_NEAR(mass, 1.0, 1e-3);
  EXPECT_NEAR(posterior_density(0.35, replicas, eps, delta), 0.9 / 0.06, 1e-12);
}

TEST(Posterior, TwoClustersEquallyLikely) {
  const PublicView view({0.1, 0.2, 0.23, 0.73});
  RngStream rng(5);
  int low = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const auto est = posterior_interval_adversary(view, 0.01, 2, rng);
    ASSERT_TRUE(est.point == 0.23 || est.point == 0.73);
    ASSERT_FALSE(est.fallback);
    low += est.point == 0.23;
  }
  EXPECT_NEAR(low / static_cast<double>(draws), 0.5, 3 * se(0.5, draws));
}

// Last phase of a symmetric run: x* sits in a random cell, every cell gets
// the replica of x*'s offset.
std::vector<double> symmetric_phase(double x_star, int S, RngStream& rng) {
  const double width = 1.0 / S;
  const double offset = x_star - std::floor(x_star / width) * width;
  std::vector<double> q;
  for (int s = 0; s < S; ++s) q.push_back(s * width + offset);
  shuffle(q, rng);
  return q;
}

TEST(Posterior, SymmetricTranscriptSucceedsOneInS) {
  RngStream rng(6);
  const int S = 10, trials = 10000;
  int hits = 0;
  for (int i = 0; i < trials; ++i) {
    const double x_star = rng.uniform(0.0, 0.999);
    const PublicView view(symmetric_phase(x_star, S, rng));
    const auto est = posterior_interval_adversary(view, 0.01, S, rng, 0.1);
    ASSERT_FALSE(est.fallback);
    hits += adversary_success(est.point, x_star, 0.04);
  }
  EXPECT_NEAR(hits / static_cast<double>(trials), 0.1, 3 * se(0.1, trials));
}

TEST(Posterior, BrokenMirrorGivesAwayTheInformativeCluster) {
  RngStream rng(7);
  const int S = 10, trials = 2000;
  const double eps = 0.01;
  int hits = 0;
  for (int i = 0; i < trials; ++i) {
    const double x_star = rng.uniform(0.05, 0.95);
    auto q = symmetric_phase(x_star, S, rng);
    // the informative query is shifted by 2 eps, its mirrors are not
    for (auto& x : q) {
      if (std::abs(x - x_star) < 1e-12) x = std::min(x + 2.0 * eps, 1.0);
    }
    const auto est = posterior_interval_adversary(PublicView(q), eps, S, rng, 0.1);
    hits += adversary_success(est.point, x_star, 0.04);
  }
  EXPECT_GT(hits / static_cast<double>(trials), 0.9);
}

TEST(Posterior, UnstructuredTranscriptFallsBack) {
  RngStream rng(8);
  const PublicView view({0.11, 0.52, 0.37, 0.93});
  const auto est = posterior_interval_adversary(view, 0.01, 4, rng);
  EXPECT_TRUE(est.fallback);
  EXPECT_EQ(est.strategy, Strategy::PosteriorInterval);
  EXPECT_TRUE(posterior_interval_adversary(PublicView({0.5}), 0.01, 4, rng).fallback);
  EXPECT_THROW(posterior_interval_adversary(PublicView{}, 0.01, 4, rng), InputError);
}

TEST(UniformNaive, MeanAndHitRate) {
  RngStream rng(9);
  const int n = 100000;
  double sum = 0.0;
  int hits = 0, edge = 0;
  for (int i = 0; i < n; ++i) {
    const double x = uniform_naive(rng).point;
    ASSERT_GE(x, 0.0);
    ASSERT_LE(x, 1.0);
    sum += x;
    hits += adversary_success(x, 0.37, 0.04);
    edge += adversary_success(x, 0.0, 0.05);
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  EXPECT_NEAR(hits / static_cast<double>(n), 0.08, 3 * se(0.08, n));
  EXPECT_NEAR(edge / static_cast<double>(n), 0.05, 3 * se(0.05, n));
}

TEST(AdversarySuccess, FunctionModeTightensByLipschitz) {
  EXPECT_TRUE(adversary_success(0.53, 0.5, 0.04));
  EXPECT_FALSE(adversary_success(0.53, 0.5, 0.04, ErrorKind::Function, 2.0));
  EXPECT_TRUE(adversary_success(0.51, 0.5, 0.04, ErrorKind::Function, 2.0));
}

TEST(Consistency, ProportionalMarginalUniformOverSubintervals) {
  ProtocolConfig c;
  c.T = 400;
  c.delta_adv = 0.1;
  c.eps_adv = 0.04;
  c.overrides.c0 = 2.0;
  std::vector<double> counts(10, 0.0);
  for (int trial = 0; trial < 10000; ++trial) {
    RngStream xr(static_cast<std::uint64_t>(trial), 0), pr(static_cast<std::uint64_t>(trial), 1),
        ar(static_cast<std::uint64_t>(trial), 2);
    const auto f = make_uniformly_convex(2.0, 1.0, xr.uniform(0.05, 0.95));
    const auto tr = run_secure_convex(c, f, pr);
    const double x = proportional_sample(tr.public_view(), ar).point;
    counts[static_cast<std::size_t>(subinterval_index(x, 0.1) - 1)] += 1.0;
  }
  EXPECT_LT(stats::chi_square_uniform(counts), 21.666);  // df 9, 1% level
}

}  // namespace
}  // namespace secopt
