#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "secopt/epoch_gd.hpp"
#include "secopt/errors.hpp"
#include "secopt/function.hpp"
#include "secopt/oracles.hpp"
#include "secopt/rng.hpp"

namespace secopt {

enum class Mode { ConvexEpochGD, Bisection, NoisyBisection };
enum class ErrorKind { Point, Function };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::ConvexEpochGD: return "convex";
    case Mode::Bisection: return "bisection";
    case Mode::NoisyBisection: return "noisy_bisection";
  }
  return "?";
}

inline Mode parse_mode(const std::string& s) {
  if (s == "convex" || s == "ConvexEpochGD") return Mode::ConvexEpochGD;
  if (s == "bisection" || s == "Bisection") return Mode::Bisection;
  if (s == "noisy_bisection" || s == "NoisyBisection") return Mode::NoisyBisection;
  throw ParameterError("unknown mode '" + s + "'");
}

/// floor(v) tolerant to representation error in v (10 * 0.1 style products).
inline std::int64_t robust_floor(double v) { return static_cast<std::int64_t>(std::floor(v + 1e-9)); }

/// S = floor(1 / delta_adv).
inline int num_subintervals(double delta_adv) {
  if (!(delta_adv > 0.0 && delta_adv < 1.0)) throw ParameterError("delta_adv must lie in (0,1)");
  return static_cast<int>(robust_floor(1.0 / delta_adv));
}

/// 1-based index of the half-open subinterval [(s-1)d, s d) holding x; the
/// last subinterval also absorbs [S d, 1].
inline int subinterval_index(double x, double delta_adv) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("subinterval_index: x must lie in [0,1]");
  const int S = num_subintervals(delta_adv);
  const auto j = static_cast<std::int64_t>(std::floor(x / delta_adv)) + 1;
  return static_cast<int>(std::clamp<std::int64_t>(j, 1, S));
}

struct ProtocolConfig {
  std::int64_t T = 200000;
  double delta_adv = 0.1;
  double eps_adv = 0.04;
  double eps = 0.01;
  double delta = 0.05;
  double kappa = 2.0;
  double lambda = 1.0;
  double w = 2.0;
  double sigma = 0.1;
  double p = 0.75;
  std::uint64_t seed = 0;
  Mode mode = Mode::ConvexEpochGD;
  EpochGdOverrides overrides;
  double x_init = 0.5;
  /// Draw each phase's subinterval order with replacement instead of as a permutation.
  bool with_replacement = false;

  // Batch-level settings.
  std::optional<double> x_star;
  bool full_range_x_star = false;
  int adversary_samples = 1;
  ErrorKind error_kind = ErrorKind::Point;

  int S() const { return num_subintervals(delta_adv); }
  std::int64_t phases() const { return T / S(); }

  /// Throws ParameterError on hard violations; returns soft warnings.
  std::vector<std::string> validate() const {
    std::vector<std::string> warnings;
    detail::require(T >= 1, "T must be positive");
    detail::require(delta_adv > 0.0 && delta_adv < 1.0, "delta_adv must lie in (0,1)");
    detail::require(eps_adv > 0.0 && eps_adv < 1.0, "eps_adv must lie in (0,1)");
    detail::require(eps > 0.0 && eps < 1.0, "eps must lie in (0,1)");
    detail::require(delta > 0.0 && delta < 1.0, "delta must lie in (0,1)");
    detail::require(2.0 * eps_adv < delta_adv, "need 2 * eps_adv < delta_adv");
    detail::require(S() >= 2, "need S = floor(1/delta_adv) >= 2");
    detail::require(adversary_samples >= 1, "adversary_samples must be >= 1");
    if (mode == Mode::ConvexEpochGD) {
      detail::require(kappa > 1.0, "kappa must be > 1");
      detail::require(lambda > 0.0, "lambda must be positive");
      detail::require(w > 0.0, "W must be positive");
      detail::require(sigma >= 0.0, "sigma must be >= 0");
    }
    if (mode == Mode::NoisyBisection) detail::require(p > 0.5 && p < 1.0, "p must lie in (0.5,1)");
    if (x_star) detail::require(*x_star >= 0.0 && *x_star <= 1.0, "x_star must lie in [0,1]");
    if (2.0 * eps > eps_adv) warnings.emplace_back("2 * eps > eps_adv: outside the analysed parameter range");
    if (std::abs(1.0 / delta_adv - S()) > 1e-9) {
      warnings.emplace_back("1/delta_adv is not an integer: [S*delta_adv, 1] is never queried");
    }
    return warnings;
  }

  /// Canonical key=value rendering; the basis of config_hash().
  std::string canonical() const {
    std::string out;
    auto add = [&out](const char* key, const std::string& value) {
      out += key;
      out += '=';
      out += value;
      out += '\n';
    };
    auto num = [](double v) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      return std::string(buf);
    };
    auto opt = [&num](const std::optional<double>& v) { return v ? num(*v) : std::string("default"); };
    add("T", std::to_string(T));
    add("delta_adv", num(delta_adv));
    add("eps_adv", num(eps_adv));
    add("eps", num(eps));
    add("delta", num(delta));
    add("kappa", num(kappa));
    add("lambda", num(lambda));
    add("W", num(w));
    add("sigma", num(sigma));
    add("p", num(p));
    add("seed", std::to_string(seed));
    add("mode", to_string(mode));
    add("C0", opt(overrides.c0));
    add("C1", opt(overrides.c1));
    add("C2", opt(overrides.c2));
    add("c0_inner_log", overrides.c0_inner_log == LogBase::Two ? "2" : "e");
    add("x_init", num(x_init));
    add("with_replacement", with_replacement ? "1" : "0");
    add("x_star", opt(x_star));
    add("full_range_x_star", full_range_x_star ? "1" : "0");
    add("adversary_samples", std::to_string(adversary_samples));
    add("error_kind", error_kind == ErrorKind::Point ? "point" : "function");
    return out;
  }

  std::uint64_t config_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical()) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  }
};

/// Adversary-visible projection of a transcript: the ordered query points only.
class PublicView {
 public:
  PublicView() = default;
  explicit PublicView(std::vector<double> points) : points_(std::move(points)) {}

  std::span<const double> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  double operator[](std::size_t i) const { return points_[i]; }

 private:
  std::vector<double> points_;
};

struct TranscriptEntry {
  std::int64_t t = 0;
  double x = 0.0;
  std::int64_t phase = 0;
  int subinterval = 0;
  bool informative = false;

  bool operator==(const TranscriptEntry&) const = default;
};

struct Transcript {
  std::vector<TranscriptEntry> entries;
  double estimate = 0.0;
  /// Responses handed to the confidential learner.
  std::int64_t effective_gradients = 0;
  std::int64_t phases = 0;
  int S = 0;
  double delta_adv = 0.0;
  std::uint64_t config_hash = 0;
  /// Bisection modes: final bracket around the estimate.
  std::optional<std::pair<double, double>> window;

  std::int64_t queries_used() const { return static_cast<std::int64_t>(entries.size()); }

  PublicView public_view() const {
    std::vector<double> points;
    points.reserve(entries.size());
    for (const auto& e : entries) points.push_back(e.x);
    return PublicView(std::move(points));
  }
};

namespace detail {

inline constexpr double kUpperQueryLimit = 1.0 - 1e-15;

/// Subinterval visiting order for one phase.
inline void phase_order(std::vector<int>& order, int S, bool with_replacement, RngStream& rng) {
  order.resize(static_cast<std::size_t>(S));
  if (with_replacement) {
    for (auto& s : order) s = static_cast<int>(rng.below(static_cast<std::uint64_t>(S))) + 1;
  } else {
    std::iota(order.begin(), order.end(), 1);
    shuffle(order, rng);
  }
}

/// Replica of the phase point in subinterval s: (s-1) d + offset.
inline double replica(int s, double offset, double delta_adv) {
  return std::min((s - 1) * delta_adv + offset, kUpperQueryLimit);
}

inline double offset_in_subinterval(double x, int j, double delta_adv) {
  return std::max(0.0, x - (j - 1) * delta_adv);
}

inline void require_scalar(const FunctionInstance& f) {
  if (f.dimension() != 1) throw UnsupportedError("protocols run on one-dimensional instances only");
}

inline EpochGdParams epoch_gd_params(const ProtocolConfig& config, std::int64_t budget) {
  EpochGdParams params;
  params.kappa = config.kappa;
  params.lambda = config.lambda;
  params.delta = config.delta;
  params.w = config.w;
  params.budget = budget;
  params.x_init = config.x_init;
  params.overrides = config.overrides;
  return params;
}

}  // namespace detail

/// Symmetric replicated protocol with EpochGd as the confidential learner.
///
/// K = floor(T/S) phases. Each phase takes xbar from the learner and queries
/// (s-1) delta_adv + offset for every subinterval s in random order, where
/// offset is xbar's position inside its own subinterval J(xbar). Only the
/// response at s = J(xbar) reaches the learner.
inline Transcript run_secure_convex(const ProtocolConfig& config, const FunctionInstance& f, RngStream& rng) {
  config.validate();
  detail::require(config.mode == Mode::ConvexEpochGD, "run_secure_convex: mode must be ConvexEpochGD");
  detail::require_scalar(f);
  const int S = config.S();
  if (config.T < S) throw ParameterError("degenerate budget: T < S leaves no complete phase");
  const std::int64_t K = config.phases();

  EpochGd learner(detail::epoch_gd_params(config, K));
  Transcript out;
  out.S = S;
  out.delta_adv = config.delta_adv;
  out.config_hash = config.config_hash();
  out.entries.reserve(static_cast<std::size_t>(K * S));

  std::vector<int> order;
  std::int64_t t = 0;
  for (std::int64_t k = 1; k <= K; ++k) {
    const double xbar = learner.propose();
    const int home = subinterval_index(xbar, config.delta_adv);
    const double offset = detail::offset_in_subinterval(xbar, home, config.delta_adv);
    detail::phase_order(order, S, config.with_replacement, rng);
    bool fed = false;
    for (int s : order) {
      const double x = detail::replica(s, offset, config.delta_adv);
      const auto response = gaussian_first_order(f, x, config.sigma, rng);
      const bool informative = s == home && !fed;
      if (informative) {
        learner.feed(response.signal());
        fed = true;
        ++out.effective_gradients;
      }
      out.entries.push_back({++t, x, k, s, informative});
    }
  }
  out.phases = K;
  out.estimate = learner.estimate();
  return out;
}

/// EpochGd spending the whole budget on its own proposals (no replication).
/// Negative control for the privacy checks.
inline Transcript run_nonsecure_convex(const ProtocolConfig& config, const FunctionInstance& f, RngStream& rng) {
  config.validate();
  detail::require_scalar(f);
  EpochGd learner(detail::epoch_gd_params(config, config.T));
  Transcript out;
  out.S = config.S();
  out.delta_adv = config.delta_adv;
  out.config_hash = config.config_hash();
  out.entries.reserve(static_cast<std::size_t>(config.T));
  for (std::int64_t t = 1; t <= config.T; ++t) {
    const double x = learner.propose();
    learner.feed(gaussian_first_order(f, x, config.sigma, rng).signal());
    out.entries.push_back({t, x, t, subinterval_index(x, config.delta_adv), true});
  }
  out.phases = config.T;
  out.effective_gradients = config.T;
  out.estimate = learner.estimate();
  return out;
}

/// Halvings needed for a bracket of width <= eps starting from delta_adv.
inline int bisection_levels(double delta_adv, double eps) {
  detail::require(eps > 0.0 && delta_adv > 0.0, "bisection_levels: positive arguments required");
  return std::max(1, static_cast<int>(std::ceil(std::log2(delta_adv / eps) - 1e-9)));
}

/// Majority-vote repetitions per bisection decision under a p-correct sign oracle:
/// ceil( ln(2 log2(delta_adv/eps) / delta) / (2 (p - 1/2)^2) ).
inline int majority_repetitions(double p, double delta_adv, double eps, double delta) {
  detail::require(p > 0.5 && p < 1.0, "majority_repetitions: p must lie in (0.5,1)");
  const double decisions = std::max(1.0, std::log2(delta_adv / eps));
  const double gap = p - 0.5;
  return std::max(1, static_cast<int>(std::ceil(std::log(2.0 * decisions / delta) / (2.0 * gap * gap))));
}

/// Repetitions for the localization phase, union-bounded over the S edge votes.
inline int localization_repetitions(double p, int S, double delta) {
  detail::require(p > 0.5 && p < 1.0, "localization_repetitions: p must lie in (0.5,1)");
  const double gap = p - 0.5;
  return std::max(1, static_cast<int>(std::ceil(std::log(2.0 * S / delta) / (2.0 * gap * gap))));
}

/// Replicated bisection for (noisy) binary search.
///
/// Localization: the left edges (s-1) delta_adv are queried in every
/// subinterval (an x*-independent pattern) and the home subinterval is the
/// rightmost edge answered "x* is to the right". Bisection: the home bracket's
/// midpoint is mirrored into all subintervals and the home response halves
/// the bracket. Under NoisyBisection each decision is a majority over
/// repeated identical phases. The estimate is the final bracket midpoint,
/// within eps of x* after S * ceil(log2(delta_adv/eps)) exact-oracle queries.
inline Transcript run_secure_bisection(const ProtocolConfig& config, const FunctionInstance& f, RngStream& rng) {
  config.validate();
  detail::require(config.mode == Mode::Bisection || config.mode == Mode::NoisyBisection,
                  "run_secure_bisection: mode must be Bisection or NoisyBisection");
  detail::require_scalar(f);
  const int S = config.S();
  const double d = config.delta_adv;
  if (config.T < S) throw ParameterError("degenerate budget: T < S leaves no complete phase");
  const bool noisy = config.mode == Mode::NoisyBisection;
  const int levels = bisection_levels(d, config.eps);
  const int repeat = noisy ? majority_repetitions(config.p, d, config.eps, config.delta) : 1;
  const int repeat_loc = noisy ? localization_repetitions(config.p, S, config.delta) : 1;
  const std::int64_t max_phases = config.phases();

  auto ask = [&](double x) {
    return noisy ? noisy_sign_oracle(f, x, config.p, rng).sign_value() : sign_oracle(f, x).sign_value();
  };

  Transcript out;
  out.S = S;
  out.delta_adv = d;
  out.config_hash = config.config_hash();
  std::vector<int> order;
  std::int64_t t = 0;
  std::int64_t phase = 0;

  // Localization: votes[s] accumulates the sign at the left edge of s.
  std::vector<int> votes(static_cast<std::size_t>(S) + 1, 0);
  int rounds = 0;
  for (; rounds < repeat_loc && phase < max_phases; ++rounds) {
    ++phase;
    detail::phase_order(order, S, config.with_replacement, rng);
    for (int s : order) {
      const double x = detail::replica(s, 0.0, d);
      votes[static_cast<std::size_t>(s)] += ask(x);
      out.entries.push_back({++t, x, phase, s, true});
      ++out.effective_gradients;
    }
  }
  int home = 1;
  for (int s = 1; s <= S; ++s) {
    if (votes[static_cast<std::size_t>(s)] < 0) home = s;
  }
  double lo = (home - 1) * d;
  double hi = home * d;

  for (int level = 1; level < levels && phase + repeat <= max_phases; ++level) {
    const double mid = 0.5 * (lo + hi);
    const double offset = mid - (home - 1) * d;
    int vote = 0;
    for (int r = 0; r < repeat; ++r) {
      ++phase;
      detail::phase_order(order, S, config.with_replacement, rng);
      bool fed = false;
      for (int s : order) {
        const double x = detail::replica(s, offset, d);
        const int answer = ask(x);
        const bool informative = s == home && !fed;
        if (informative) {
          vote += answer;
          fed = true;
          ++out.effective_gradients;
        }
        out.entries.push_back({++t, x, phase, s, informative});
      }
    }
    // Negative sign: the subgradient points left of x*, so x* lies above mid.
    (vote < 0 ? lo : hi) = mid;
  }

  out.phases = phase;
  out.window = std::make_pair(lo, hi);
  out.estimate = 0.5 * (lo + hi);
  return out;
}

/// Dispatches on config.mode.
inline Transcript run_protocol(const ProtocolConfig& config, const FunctionInstance& f, RngStream& rng) {
  return config.mode == Mode::ConvexEpochGD ? run_secure_convex(config, f, rng) : run_secure_bisection(config, f, rng);
}

}  // namespace secopt
