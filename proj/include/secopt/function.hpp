#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "secopt/errors.hpp"

namespace secopt {

using Point = std::vector<double>;

inline double distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

/// coeff * ||x - center||^exponent + offset
struct PowerTerm {
  double coeff = 1.0;
  Point center;
  double exponent = 2.0;
  double offset = 0.0;

  double value(std::span<const double> x) const {
    return coeff * std::pow(distance(x, center), exponent) + offset;
  }

  /// Gradient; the zero vector at the center (a valid subgradient for exponent >= 1).
  Point gradient(std::span<const double> x) const {
    Point g(x.size(), 0.0);
    const double r = distance(x, center);
    if (r == 0.0) return g;
    const double scale = coeff * exponent * std::pow(r, exponent - 2.0);
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = scale * (x[i] - center[i]);
    return g;
  }

  /// sup of ||gradient|| over the box [lo, hi]^d, attained at the farthest corner.
  double lipschitz_on_box(double lo, double hi) const {
    double sq = 0.0;
    for (double c : center) {
      const double far = std::max(std::abs(lo - c), std::abs(hi - c));
      sq += far * far;
    }
    return coeff * exponent * std::pow(std::sqrt(sq), exponent - 1.0);
  }
};

/// Convex objective f(x) = max_i term_i(x) on the box [lo, hi]^d.
///
/// Immutable after construction. Covers the absolute-value family, the
/// uniformly convex power family and the max-of-powers hard instances.
/// On ties between terms the subgradient of the first maximal term is
/// returned, so list the base term first.
class FunctionInstance {
 public:
  FunctionInstance(std::vector<PowerTerm> terms, Point optimizer, std::optional<double> kappa, double lambda,
                   double domain_lo = 0.0, double domain_hi = 1.0)
      : terms_(std::move(terms)),
        optimizer_(std::move(optimizer)),
        kappa_(kappa),
        lambda_(lambda),
        domain_lo_(domain_lo),
        domain_hi_(domain_hi) {
    detail::require(!terms_.empty(), "FunctionInstance needs at least one term");
    for (const auto& t : terms_) {
      detail::require(t.center.size() == optimizer_.size(), "term dimension mismatch");
      lipschitz_ = std::max(lipschitz_, t.lipschitz_on_box(domain_lo_, domain_hi_));
    }
    optimal_value_ = eval(optimizer_);
  }

  std::size_t dimension() const { return optimizer_.size(); }
  const Point& optimizer() const { return optimizer_; }
  double optimal_value() const { return optimal_value_; }
  /// Uniform-convexity exponent; empty for the absolute-value family.
  std::optional<double> kappa() const { return kappa_; }
  /// Uniform-convexity modulus; 0 when none is certified.
  double lambda() const { return lambda_; }
  double lipschitz() const { return lipschitz_; }
  double domain_lo() const { return domain_lo_; }
  double domain_hi() const { return domain_hi_; }
  const std::vector<PowerTerm>& terms() const { return terms_; }

  double eval(std::span<const double> x) const { return terms_[active_term(x)].value(x); }
  double eval(double x) const { return eval(std::span<const double>(&x, 1)); }

  Point subgrad(std::span<const double> x) const { return terms_[active_term(x)].gradient(x); }
  double subgrad(double x) const {
    require_1d();
    return subgrad(std::span<const double>(&x, 1))[0];
  }

  /// Index of the first term attaining the max at x.
  std::size_t active_term(std::span<const double> x) const {
    if (x.size() != dimension()) throw DomainError("point dimension mismatch");
    std::size_t best = 0;
    double best_value = terms_[0].value(x);
    for (std::size_t i = 1; i < terms_.size(); ++i) {
      const double v = terms_[i].value(x);
      if (v > best_value) {
        best = i;
        best_value = v;
      }
    }
    return best;
  }

  double point_error(double x) const { return std::abs(x - optimizer_.at(0)); }
  double function_error(double x) const { return eval(x) - optimal_value_; }

 private:
  void require_1d() const {
    if (dimension() != 1) throw UnsupportedError("scalar access requires a one-dimensional instance");
  }

  std::vector<PowerTerm> terms_;
  Point optimizer_;
  std::optional<double> kappa_;
  double lambda_;
  double domain_lo_;
  double domain_hi_;
  double lipschitz_ = 0.0;
  double optimal_value_ = 0.0;
};

/// f(x) = |x - x_star| on [0, 1].
inline FunctionInstance make_abs(double x_star) {
  if (!(x_star >= 0.0 && x_star <= 1.0)) throw ParameterError("make_abs: x_star must lie in [0,1]");
  // |x - x*| >= (lambda/2)|x - x*|^1 holds with lambda = 2.
  return FunctionInstance({PowerTerm{1.0, {x_star}, 1.0, 0.0}}, {x_star}, std::nullopt, 2.0);
}

/// f(x) = (lambda/2) ||x - x_star||^kappa on [0, 1]^d.
inline FunctionInstance make_uniformly_convex(double kappa, double lambda, Point x_star) {
  if (!(kappa >= 2.0)) throw ParameterError("make_uniformly_convex: kappa must be >= 2");
  if (!(lambda > 0.0)) throw ParameterError("make_uniformly_convex: lambda must be positive");
  if (x_star.empty()) throw ParameterError("make_uniformly_convex: empty optimizer");
  for (double c : x_star) {
    if (!(c >= 0.0 && c <= 1.0)) throw ParameterError("make_uniformly_convex: x_star must lie in [0,1]^d");
  }
  PowerTerm term{lambda / 2.0, x_star, kappa, 0.0};
  return FunctionInstance({std::move(term)}, std::move(x_star), kappa, lambda);
}

inline FunctionInstance make_uniformly_convex(double kappa, double lambda, double x_star) {
  return make_uniformly_convex(kappa, lambda, Point{x_star});
}

}  // namespace secopt
