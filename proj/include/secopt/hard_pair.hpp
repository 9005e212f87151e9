#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "secopt/errors.hpp"
#include "secopt/function.hpp"

namespace secopt {

struct HardPairOptions {
  double kappa = 2.0;
  /// When set, the indistinguishability region must have radius >= eps_adv.
  std::optional<double> eps_adv;
  double domain_lo = 0.0;
  double domain_hi = 1.0;
};

/// Two max-of-powers objectives that agree (value and subgradient) outside a
/// ball J around the shared base center, with optimizers pushed apart inside it:
///
///   f0(x) = c0 ||x - center||^kappa
///   h1(x) = c1 ||x - (center - eps/sqrt(d) 1)||^kappa + c2,  h2 mirrored
///   f1 = max(f0, h1),  f2 = max(f0, h2)
struct HardPair {
  FunctionInstance f1;
  FunctionInstance f2;
  Point center;
  double region_radius;  // ||center - x'||
  Point crossing;        // x' on the diagonal with f0(x') = h2(x')
  double c0, c1, c2;
  double eps;
  double kappa;

  /// Strictly outside J, where f1 and f2 coincide.
  bool outside_region(std::span<const double> x) const { return distance(x, center) > region_radius; }
  bool outside_region(double x) const { return outside_region(std::span<const double>(&x, 1)); }

  /// ||x*_{f1} - x*_{f2}||.
  double separation() const { return distance(f1.optimizer(), f2.optimizer()); }
};

namespace detail {

/// Largest r >= 0 with c0 r^k = c1 (r + eps)^k + c2, if any.
///
/// g(r) = c0 r^k - c1 (r+eps)^k - c2 decreases up to r0 and increases after
/// (c0 > c1), so the largest root is the unique root on [r0, inf) and exists
/// iff g(r0) <= 0.
inline std::optional<double> largest_crossing_radius(double c0, double c1, double c2, double eps, double kappa) {
  auto g = [&](double r) { return c0 * std::pow(r, kappa) - c1 * std::pow(r + eps, kappa) - c2; };
  double r0 = 0.0;
  if (kappa > 1.0) {
    const double q = std::pow(c1 / c0, 1.0 / (kappa - 1.0));
    r0 = eps * q / (1.0 - q);
  }
  if (g(r0) > 0.0) return std::nullopt;
  double lo = r0;
  double hi = std::max(1.0, 2.0 * r0);
  while (g(hi) <= 0.0) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) <= 0.0 ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace detail

/// The c2 placing the outer crossing of f0 and h2 exactly at distance `radius`.
inline double solve_c2_for_radius(double c0, double c1, double eps, double kappa, double radius) {
  detail::require(c0 > c1 && c1 > 0.0, "solve_c2_for_radius: need c0 > c1 > 0");
  detail::require(radius > 0.0 && eps > 0.0, "solve_c2_for_radius: radius and eps must be positive");
  if (kappa > 1.0) {
    const double q = std::pow(c1 / c0, 1.0 / (kappa - 1.0));
    if (radius < eps * q / (1.0 - q)) {
      throw ParameterError("solve_c2_for_radius: radius lies on the inner branch; no outer crossing there");
    }
  }
  return c0 * std::pow(radius, kappa) - c1 * std::pow(radius + eps, kappa);
}

inline HardPair make_hard_pair(double c0, double c1, double c2, double eps, double center, int dimension,
                               const HardPairOptions& options = {}) {
  const double kappa = options.kappa;
  detail::require(c0 > c1 && c1 > 0.0, "make_hard_pair: need c0 > c1 > 0");
  detail::require(eps > 0.0, "make_hard_pair: eps must be positive");
  detail::require(dimension >= 1, "make_hard_pair: dimension must be >= 1");
  detail::require(kappa >= 1.0, "make_hard_pair: kappa must be >= 1");

  const auto radius = detail::largest_crossing_radius(c0, c1, c2, eps, kappa);
  if (!radius) {
    throw ConstructionError("make_hard_pair: f0 and h2 never cross (c2 = " + std::to_string(c2) +
                            "); f1 and f2 would both equal f0");
  }
  if (options.eps_adv && *radius < *options.eps_adv) {
    throw ConstructionError("make_hard_pair: crossing radius " + std::to_string(*radius) +
                            " is below eps_adv; raise c2");
  }
  // h1 must dominate at the base center, otherwise both optimizers sit there.
  if (c1 * std::pow(eps, kappa) + c2 <= 0.0) {
    throw ConstructionError("make_hard_pair: h1(center) <= f0(center); the optimizers coincide");
  }

  const auto d = static_cast<std::size_t>(dimension);
  const double unit = 1.0 / std::sqrt(static_cast<double>(d));
  auto along_diagonal = [&](double t) {
    Point p(d);
    for (auto& c : p) c = center + t * unit;
    return p;
  };

  // Optimizer of f1 on the diagonal x = center + t u, t in [-eps, 0].
  double t_star = -eps;
  if (c2 < c0 * std::pow(eps, kappa)) {
    // f0 still dominates at h1's minimizer: the optimizer is where the
    // decreasing h1 branch meets the increasing f0 branch.
    auto phi = [&](double t) { return c0 * std::pow(-t, kappa) - c1 * std::pow(t + eps, kappa) - c2; };
    double lo = -eps;
    double hi = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (phi(mid) > 0.0 ? lo : hi) = mid;
    }
    t_star = 0.5 * (lo + hi);
  }

  const Point base_center(d, center);
  const PowerTerm f0{c0, base_center, kappa, 0.0};
  const PowerTerm h1{c1, along_diagonal(-eps), kappa, c2};
  const PowerTerm h2{c1, along_diagonal(eps), kappa, c2};

  FunctionInstance f1({f0, h1}, along_diagonal(t_star), kappa, 0.0, options.domain_lo, options.domain_hi);
  FunctionInstance f2({f0, h2}, along_diagonal(-t_star), kappa, 0.0, options.domain_lo, options.domain_hi);
  return HardPair{std::move(f1), std::move(f2), base_center, *radius, along_diagonal(-*radius), c0, c1, c2, eps,
                  kappa};
}

}  // namespace secopt
