#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "secopt/errors.hpp"
#include "secopt/protocol.hpp"
#include "secopt/rng.hpp"

namespace secopt {

enum class Strategy { Proportional, PackingBall, PosteriorInterval, UniformNaive };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::Proportional: return "proportional";
    case Strategy::PackingBall: return "packing_ball";
    case Strategy::PosteriorInterval: return "posterior_interval";
    case Strategy::UniformNaive: return "uniform_naive";
  }
  return "?";
}

struct AdversaryEstimate {
  double point = 0.0;
  Strategy strategy = Strategy::Proportional;
  /// The strategy could not apply its rule and sampled proportionally instead.
  bool fallback = false;
  /// Posterior adversary found one replica out of line with the rest.
  bool asymmetric = false;
};

/// Success means |estimate - x*| <= eps_adv. Function-error mode tightens the
/// point tolerance to eps_adv / L.
inline bool adversary_success(double estimate, double x_star, double eps_adv, ErrorKind kind = ErrorKind::Point,
                              double lipschitz = 1.0) {
  const double tol = kind == ErrorKind::Point ? eps_adv : eps_adv / lipschitz;
  return std::abs(estimate - x_star) <= tol;
}

/// A uniformly chosen past query.
inline AdversaryEstimate proportional_sample(const PublicView& queries, RngStream& rng) {
  if (queries.empty()) throw InputError("proportional_sample: no queries");
  return {queries[rng.below(queries.size())], Strategy::Proportional};
}

/// theta_k = (2k - 1) r, k = 1..floor(1/(2r)): a 2r-packing of [0,1].
inline std::vector<double> packing_centers(double r) {
  detail::require(r > 0.0 && r <= 0.5, "packing_centers: r must lie in (0, 0.5]");
  std::vector<double> centers;
  const auto n = robust_floor(1.0 / (2.0 * r));
  for (std::int64_t k = 1; k <= n; ++k) centers.push_back(static_cast<double>(2 * k - 1) * r);
  return centers;
}

/// Returns theta_k with probability #{t : X_t in B(theta_k, r)} / T. The
/// remaining mass (queries in no ball) goes to those queries themselves,
/// uniformly, so the output is a proper distribution.
inline AdversaryEstimate packing_ball_sample(const PublicView& queries, double r, std::span<const double> centers,
                                             RngStream& rng) {
  if (queries.empty()) throw InputError("packing_ball_sample: no queries");
  detail::require(r > 0.0, "packing_ball_sample: r must be positive");
  std::vector<double> sorted(centers.begin(), centers.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] - sorted[i - 1] < 2.0 * r - 1e-12) throw PackingError("packing_ball_sample: balls overlap");
  }
  const double x = queries[rng.below(queries.size())];
  // Nearest center; on a shared boundary the lower center wins.
  auto it = std::lower_bound(sorted.begin(), sorted.end(), x - r);
  if (it != sorted.end() && std::abs(*it - x) <= r) return {*it, Strategy::PackingBall};
  return {x, Strategy::PackingBall, true};
}

/// Posterior density of x* given the last-phase replicas X_s: mass
/// (1 - delta)/(2 S eps) on the union of [X_s - eps, X_s + eps] and
/// delta/(1 - 2 S eps) elsewhere.
inline double posterior_density(double x, std::span<const double> replicas, double eps, double delta) {
  const double S = static_cast<double>(replicas.size());
  detail::require(2.0 * S * eps < 1.0, "posterior_density: need 2 S eps < 1");
  for (double c : replicas) {
    if (std::abs(x - c) <= eps) return (1.0 - delta) / (2.0 * S * eps);
  }
  return delta / (1.0 - 2.0 * S * eps);
}

namespace detail {

/// Position of x inside its cell of width `spacing`, in [0, spacing).
inline double cell_offset(double x, double spacing) {
  const double o = x - std::floor(x / spacing) * spacing;
  return o >= spacing ? 0.0 : o;
}

inline bool offsets_agree(double a, double b, double spacing, double tol) {
  const double diff = std::abs(a - b);
  return std::min(diff, spacing - diff) <= tol;
}

}  // namespace detail

inline constexpr double kReplicaTolerance = 1e-9;

/// Best response to a symmetric replicated transcript.
///
/// Takes the final S queries as the last phase. When they share one offset
/// within their cells of width delta_adv (default 1/S) the posterior is
/// flat across the S clusters and a uniformly chosen replica is returned.
/// When exactly one replica is out of line it must be the informative one
/// and is returned. Any other pattern falls back to proportional sampling.
inline AdversaryEstimate posterior_interval_adversary(const PublicView& queries, double eps, int S, RngStream& rng,
                                                      std::optional<double> delta_adv = std::nullopt) {
  if (queries.empty()) throw InputError("posterior_interval_adversary: no queries");
  detail::require(S >= 1, "posterior_interval_adversary: S must be >= 1");
  detail::require(eps > 0.0, "posterior_interval_adversary: eps must be positive");
  const double spacing = delta_adv.value_or(1.0 / S);
  auto fallback = [&] {
    auto est = proportional_sample(queries, rng);
    est.strategy = Strategy::PosteriorInterval;
    est.fallback = true;
    return est;
  };
  if (queries.size() < static_cast<std::size_t>(S)) return fallback();

  const auto last = queries.points().last(static_cast<std::size_t>(S));
  std::vector<double> offsets;
  offsets.reserve(last.size());
  for (double x : last) offsets.push_back(detail::cell_offset(x, spacing));

  // For each replica, how many others share its offset.
  std::vector<int> agree(last.size(), 0);
  for (std::size_t i = 0; i < last.size(); ++i) {
    for (std::size_t j = 0; j < last.size(); ++j) {
      if (i != j && detail::offsets_agree(offsets[i], offsets[j], spacing, kReplicaTolerance)) ++agree[i];
    }
  }
  const int n = static_cast<int>(last.size());
  const bool symmetric = std::all_of(agree.begin(), agree.end(), [n](int a) { return a == n - 1; });
  if (symmetric) {
    std::vector<double> clusters(last.begin(), last.end());
    std::sort(clusters.begin(), clusters.end());
    clusters.erase(std::unique(clusters.begin(), clusters.end(),
                               [](double a, double b) { return std::abs(a - b) <= kReplicaTolerance; }),
                   clusters.end());
    return {clusters[rng.below(clusters.size())], Strategy::PosteriorInterval};
  }
  if (n >= 3) {
    const auto outliers = std::count(agree.begin(), agree.end(), 0);
    const auto aligned = std::count(agree.begin(), agree.end(), n - 2);
    if (outliers == 1 && aligned == n - 1) {
      const auto idx = static_cast<std::size_t>(std::find(agree.begin(), agree.end(), 0) - agree.begin());
      return {last[idx], Strategy::PosteriorInterval, false, true};
    }
  }
  return fallback();
}

/// A uniform point in [0,1], ignoring the queries.
inline AdversaryEstimate uniform_naive(RngStream& rng) { return {rng.uniform(), Strategy::UniformNaive}; }

}  // namespace secopt
