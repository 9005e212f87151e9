#pragma once

#include <span>
#include <utility>

#include "secopt/errors.hpp"
#include "secopt/function.hpp"
#include "secopt/rng.hpp"

namespace secopt {

/// Oracle answer: a sign (sign oracles) or a noisy (value, gradient) pair.
class OracleResponse {
 public:
  enum class Kind { Sign, FirstOrder };

  static OracleResponse sign(int s) { return OracleResponse(Kind::Sign, s > 0 ? 1 : -1, 0.0, {}); }
  static OracleResponse first_order(double value, Point gradient) {
    return OracleResponse(Kind::FirstOrder, 0, value, std::move(gradient));
  }

  Kind kind() const { return kind_; }
  int sign_value() const {
    if (kind_ != Kind::Sign) throw ProtocolOrderError("OracleResponse: not a sign response");
    return sign_;
  }
  double value() const {
    if (kind_ != Kind::FirstOrder) throw ProtocolOrderError("OracleResponse: not a first-order response");
    return value_;
  }
  const Point& gradient() const {
    if (kind_ != Kind::FirstOrder) throw ProtocolOrderError("OracleResponse: not a first-order response");
    return gradient_;
  }

  /// Scalar signal fed to a 1-d learner: the sign, or the first gradient coordinate.
  double signal() const { return kind_ == Kind::Sign ? static_cast<double>(sign_) : gradient_.at(0); }

  bool operator==(const OracleResponse&) const = default;

 private:
  OracleResponse(Kind kind, int s, double value, Point gradient)
      : kind_(kind), sign_(s), value_(value), gradient_(std::move(gradient)) {}

  Kind kind_;
  int sign_;
  double value_;
  Point gradient_;
};

namespace detail {

inline void require_scalar_domain(const FunctionInstance& f, double x) {
  if (f.dimension() != 1) throw UnsupportedError("sign oracles require a one-dimensional instance");
  if (!(x >= f.domain_lo() && x <= f.domain_hi())) throw DomainError("query outside the domain");
}

}  // namespace detail

/// sign(g(x)); +1 when the subgradient is zero.
inline OracleResponse sign_oracle(const FunctionInstance& f, double x) {
  detail::require_scalar_domain(f, x);
  return OracleResponse::sign(f.subgrad(x) < 0.0 ? -1 : 1);
}

/// The exact sign with probability p, its negation otherwise.
inline OracleResponse noisy_sign_oracle(const FunctionInstance& f, double x, double p, RngStream& rng) {
  if (!(p > 0.5 && p < 1.0)) throw ParameterError("noisy_sign_oracle: p must lie in (0.5, 1)");
  const int exact = sign_oracle(f, x).sign_value();
  return OracleResponse::sign(rng.bernoulli(p) ? exact : -exact);
}

/// (f(x) + Z1, g(x) + Z2), Z1 ~ N(0, sigma^2), Z2 ~ N(0, sigma^2 I).
inline OracleResponse gaussian_first_order(const FunctionInstance& f, std::span<const double> x, double sigma,
                                           RngStream& rng) {
  if (!(sigma >= 0.0)) throw ParameterError("gaussian_first_order: sigma must be >= 0");
  double value = f.eval(x);
  Point gradient = f.subgrad(x);
  if (sigma > 0.0) {
    value += sigma * rng.normal();
    for (auto& g : gradient) g += sigma * rng.normal();
  }
  return OracleResponse::first_order(value, std::move(gradient));
}

inline OracleResponse gaussian_first_order(const FunctionInstance& f, double x, double sigma, RngStream& rng) {
  return gaussian_first_order(f, std::span<const double>(&x, 1), sigma, rng);
}

}  // namespace secopt
