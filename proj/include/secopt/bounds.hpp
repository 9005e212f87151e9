#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "secopt/errors.hpp"
#include "secopt/function.hpp"
#include "secopt/hard_pair.hpp"
#include "secopt/protocol.hpp"

namespace secopt {

// Order-level query-complexity bounds and the KL diagnostic behind the convex
// lower bound. Every bound carries an explicit constant c (default 1); only
// scaling is meaningful. Logarithms are natural.

/// A bound value plus non-fatal precondition warnings.
struct Bound {
  double value = 0.0;
  std::vector<std::string> warnings;
};

/// h2(delta) = -delta ln delta - (1 - delta) ln(1 - delta), in nats.
inline double binary_entropy(double delta) {
  detail::require(delta >= 0.0 && delta <= 1.0, "binary_entropy: delta must lie in [0,1]");
  auto term = [](double q) { return q > 0.0 ? -q * std::log(q) : 0.0; };
  return term(delta) + term(1.0 - delta);
}

/// Secure binary search: c (1 - delta)/delta_adv * ln(eps_adv/eps).
inline Bound lower_bound_binary(double eps, double eps_adv, double delta, double delta_adv, double c = 1.0) {
  detail::require(eps > 0.0 && eps_adv > 0.0, "lower_bound_binary: eps and eps_adv must be positive");
  detail::require(delta >= 0.0 && delta < 1.0, "lower_bound_binary: delta must lie in [0,1)");
  detail::require(delta_adv > 0.0 && delta_adv < 1.0, "lower_bound_binary: delta_adv must lie in (0,1)");
  Bound b{c * (1.0 - delta) / delta_adv * std::log(eps_adv / eps), {}};
  if (2.0 * eps > eps_adv) b.warnings.emplace_back("precondition 2 eps <= eps_adv violated");
  if (eps_adv > delta_adv / 2.0) b.warnings.emplace_back("precondition eps_adv <= delta_adv/2 violated");
  return b;
}

/// c(p) = (2p - 1) ln(p / (1 - p)).
inline double c_of_p(double p) {
  detail::require(p > 0.5 && p < 1.0, "c_of_p: p must lie in (0.5,1)");
  return (2.0 * p - 1.0) * std::log(p / (1.0 - p));
}

/// Secure noisy binary search: the binary bound divided by c(p).
inline Bound lower_bound_noisy(double eps, double eps_adv, double delta, double delta_adv, double p, double c = 1.0) {
  Bound b = lower_bound_binary(eps, eps_adv, delta, delta_adv, c);
  const double cp = c_of_p(p);
  if (!(cp > 0.0)) throw ParameterError("lower_bound_noisy: c(p) vanished");
  b.value /= cp;
  return b;
}

/// Secure stochastic convex optimization:
/// c sigma^2 (ln 2 - h2(delta)) / (delta_adv eps^q), q = (2k-2)/k for function
/// error and 2k-2 for point error. The hidden ln(eps_adv/eps) factor is not
/// multiplied in.
inline Bound lower_bound_convex(double eps, double delta, double delta_adv, double kappa, double sigma,
                                ErrorKind kind, double c = 1.0, int dimension = 1,
                                std::optional<double> eps_adv = std::nullopt) {
  detail::require(eps > 0.0, "lower_bound_convex: eps must be positive");
  detail::require(delta >= 0.0 && delta < 0.5, "lower_bound_convex: delta must lie in [0, 0.5)");
  detail::require(delta_adv > 0.0 && delta_adv < 1.0, "lower_bound_convex: delta_adv must lie in (0,1)");
  detail::require(kappa > 1.0, "lower_bound_convex: kappa must be > 1");
  detail::require(sigma >= 0.0, "lower_bound_convex: sigma must be >= 0");
  const double q = kind == ErrorKind::Function ? (2.0 * kappa - 2.0) / kappa : 2.0 * kappa - 2.0;
  Bound b{c * sigma * sigma * (std::log(2.0) - binary_entropy(delta)) / (delta_adv * std::pow(eps, q)), {}};
  if (eps_adv) {
    if (2.0 * std::sqrt(static_cast<double>(dimension)) * eps > *eps_adv) {
      b.warnings.emplace_back("precondition 2 sqrt(d) eps <= eps_adv violated");
    }
    if (*eps_adv > std::pow(delta_adv, 1.0 / dimension)) {
      b.warnings.emplace_back("precondition eps_adv <= delta_adv^(1/d) violated");
    }
  }
  return b;
}

/// Upper-bound exponents: function error k/(2k-2), point error 1/(2k-2).
inline std::pair<double, double> upper_bound_exponents(double kappa) {
  detail::require(kappa > 1.0, "upper_bound_exponents: kappa must be > 1");
  return {kappa / (2.0 * kappa - 2.0), 1.0 / (2.0 * kappa - 2.0)};
}

/// ((T d)^{-k/(2k-2)}, (T d)^{-1/(2k-2)}), constant-free.
inline std::pair<double, double> upper_bound_rates(double T, double delta_adv, double kappa) {
  const auto [fe, pe] = upper_bound_exponents(kappa);
  const double n = T * delta_adv;
  detail::require(n >= 1.0, "upper_bound_rates: need T * delta_adv >= 1");
  return {std::pow(n, -fe), std::pow(n, -pe)};
}

struct RateReport {
  std::string setting;
  double lower_bound = 0.0;
  double budget = 0.0;
  double delta_adv = 0.0;
  double kappa = 0.0;
  double function_rate = 0.0;
  double point_rate = 0.0;
  double function_exponent = 0.0;
  double point_exponent = 0.0;
  std::vector<std::string> notes;
};

inline RateReport convex_rate_report(double T, const ProtocolConfig& config, double c = 1.0) {
  RateReport r;
  r.setting = "convex";
  r.budget = T;
  r.delta_adv = config.delta_adv;
  r.kappa = config.kappa;
  const auto lb = lower_bound_convex(config.eps, config.delta, config.delta_adv, config.kappa, config.sigma,
                                     config.error_kind, c, 1, config.eps_adv);
  r.lower_bound = lb.value;
  r.notes = lb.warnings;
  std::tie(r.function_rate, r.point_rate) = upper_bound_rates(T, config.delta_adv, config.kappa);
  std::tie(r.function_exponent, r.point_exponent) = upper_bound_exponents(config.kappa);
  r.function_exponent = -r.function_exponent;
  r.point_exponent = -r.point_exponent;
  r.notes.push_back("order-level; a ln(eps_adv/eps) factor is hidden (ln = " +
                    std::to_string(std::log(config.eps_adv / config.eps)) + ")");
  return r;
}

/// KL between the Gaussian oracle's answer laws under f_i and f_j at x:
/// ((f_i(x) - f_j(x))^2 + ||g_i(x) - g_j(x)||^2) / (2 sigma^2).
inline double kl_gaussian(const FunctionInstance& fi, const FunctionInstance& fj, std::span<const double> x,
                          double sigma) {
  detail::require(sigma >= 0.0, "kl_gaussian: sigma must be >= 0");
  const double df = fi.eval(x) - fj.eval(x);
  const Point gi = fi.subgrad(x);
  const Point gj = fj.subgrad(x);
  double sq = df * df;
  for (std::size_t k = 0; k < gi.size(); ++k) sq += (gi[k] - gj[k]) * (gi[k] - gj[k]);
  if (sigma == 0.0) return sq == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return sq / (2.0 * sigma * sigma);
}

inline double kl_gaussian_pair(const HardPair& pair, std::span<const double> x, double sigma) {
  return kl_gaussian(pair.f1, pair.f2, x, sigma);
}

inline double kl_gaussian_pair(const HardPair& pair, double x, double sigma) {
  return kl_gaussian_pair(pair, std::span<const double>(&x, 1), sigma);
}

}  // namespace secopt
