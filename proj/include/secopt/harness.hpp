#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "secopt/adversary.hpp"
#include "secopt/bounds.hpp"
#include "secopt/errors.hpp"
#include "secopt/function.hpp"
#include "secopt/protocol.hpp"
#include "secopt/rng.hpp"
#include "secopt/stats.hpp"

namespace secopt {

inline constexpr std::array<Strategy, 4> kAdversaries = {Strategy::Proportional, Strategy::PackingBall,
                                                         Strategy::PosteriorInterval, Strategy::UniformNaive};

struct TrialOutcome {
  std::int64_t trial = 0;
  std::uint64_t seed = 0;
  double x_star = 0.0;
  double estimate = 0.0;
  double point_error = 0.0;
  double function_error = 0.0;
  /// Per adversary (kAdversaries order): fraction of samples within eps_adv.
  std::array<double, 4> adv_success{};
  std::int64_t queries_used = 0;
  double ms = 0.0;
};

struct Quantiles {
  double q10 = 0.0;
  double q50 = 0.0;
  double q90 = 0.0;
};

struct BatchSummary {
  ProtocolConfig config;
  std::uint64_t master_seed = 0;
  std::int64_t trials = 0;
  /// Frequency of {err >= eps} under config.error_kind.
  double delta_hat = 0.0;
  double delta_hat_se = 0.0;
  std::array<double, 4> adv_rate{};
  std::array<double, 4> adv_se{};
  /// (trial, sample) pairs behind each adversary rate.
  std::int64_t adv_pairs = 0;
  Quantiles point_error;
  Quantiles function_error;
  std::vector<std::string> warnings;
  std::vector<TrialOutcome> outcomes;

  double budget_per_learner() const { return static_cast<double>(config.T) * config.delta_adv; }
};

struct RunOptions {
  int workers = 1;
  /// Record wall time per trial; off gives byte-reproducible CSV.
  bool timing = true;
  /// Negative control: plain EpochGd without replication.
  bool secure = true;
};

/// Objective for one trial: uniformly convex in convex mode, |x - x*| otherwise.
inline FunctionInstance trial_objective(const ProtocolConfig& config, double x_star) {
  return config.mode == Mode::ConvexEpochGD ? make_uniformly_convex(config.kappa, config.lambda, x_star)
                                            : make_abs(x_star);
}

inline double draw_x_star(const ProtocolConfig& config, RngStream& rng) {
  if (config.x_star) return *config.x_star;
  return config.full_range_x_star ? rng.uniform() : rng.uniform(0.05, 0.95);
}

/// One trial with per-trial seed derive_seed(master_seed, trial).
inline TrialOutcome run_trial(const ProtocolConfig& config, std::int64_t trial, std::uint64_t master_seed,
                              const RunOptions& options = {}) {
  const auto start = std::chrono::steady_clock::now();
  TrialOutcome out;
  out.trial = trial;
  out.seed = derive_seed(master_seed, static_cast<std::uint64_t>(trial));

  RngStream x_rng(out.seed, 0);
  RngStream protocol_rng(out.seed, 1);
  out.x_star = draw_x_star(config, x_rng);
  const FunctionInstance f = trial_objective(config, out.x_star);

  const Transcript transcript =
      options.secure ? run_protocol(config, f, protocol_rng) : run_nonsecure_convex(config, f, protocol_rng);
  out.estimate = transcript.estimate;
  out.point_error = f.point_error(transcript.estimate);
  out.function_error = f.function_error(transcript.estimate);
  out.queries_used = transcript.queries_used();

  const PublicView view = transcript.public_view();
  const auto centers = packing_centers(config.eps_adv);
  const int S = config.S();
  for (std::size_t a = 0; a < kAdversaries.size(); ++a) {
    RngStream adv_rng(out.seed, 2 + a);
    int hits = 0;
    for (int k = 0; k < config.adversary_samples; ++k) {
      AdversaryEstimate est;
      switch (kAdversaries[a]) {
        case Strategy::Proportional: est = proportional_sample(view, adv_rng); break;
        case Strategy::PackingBall: est = packing_ball_sample(view, config.eps_adv, centers, adv_rng); break;
        case Strategy::PosteriorInterval:
          est = posterior_interval_adversary(view, config.eps, S, adv_rng, config.delta_adv);
          break;
        case Strategy::UniformNaive: est = uniform_naive(adv_rng); break;
      }
      hits += adversary_success(est.point, out.x_star, config.eps_adv, config.error_kind, f.lipschitz()) ? 1 : 0;
    }
    out.adv_success[a] = static_cast<double>(hits) / config.adversary_samples;
  }
  if (options.timing) {
    out.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return out;
}

inline BatchSummary summarize(const ProtocolConfig& config, std::uint64_t master_seed,
                              std::vector<TrialOutcome> outcomes) {
  if (outcomes.empty()) throw ParameterError("summarize: no trials");
  BatchSummary s;
  s.config = config;
  s.master_seed = master_seed;
  s.trials = static_cast<std::int64_t>(outcomes.size());
  const double n = static_cast<double>(outcomes.size());

  std::vector<double> pe, fe;
  double failures = 0.0;
  for (const auto& o : outcomes) {
    pe.push_back(o.point_error);
    fe.push_back(o.function_error);
    const double err = config.error_kind == ErrorKind::Point ? o.point_error : o.function_error;
    if (err >= config.eps) failures += 1.0;
    for (std::size_t a = 0; a < 4; ++a) s.adv_rate[a] += o.adv_success[a];
  }
  s.delta_hat = failures / n;
  s.delta_hat_se = stats::binomial_se(s.delta_hat, n);
  s.adv_pairs = s.trials * config.adversary_samples;
  for (std::size_t a = 0; a < 4; ++a) {
    s.adv_rate[a] /= n;
    s.adv_se[a] = stats::binomial_se(s.adv_rate[a], static_cast<double>(s.adv_pairs));
  }
  s.point_error = {stats::quantile(pe, 0.1), stats::quantile(pe, 0.5), stats::quantile(pe, 0.9)};
  s.function_error = {stats::quantile(fe, 0.1), stats::quantile(fe, 0.5), stats::quantile(fe, 0.9)};
  if (config.delta_adv * static_cast<double>(s.adv_pairs) < 50.0) {
    s.warnings.emplace_back("delta_adv * samples < 50: normal-approximation SE bands are unreliable");
  }
  s.outcomes = std::move(outcomes);
  return s;
}

/// N independent trials on a worker pool. Output does not depend on the
/// worker count: every trial owns its seed and results are stored by id.
inline BatchSummary run_batch(const ProtocolConfig& config, std::int64_t trials, std::uint64_t master_seed,
                              const RunOptions& options = {}) {
  if (trials <= 0) throw ParameterError("run_batch: N must be positive");
  auto warnings = config.validate();
  if (!options.secure && config.mode != Mode::ConvexEpochGD) {
    throw ParameterError("run_batch: the non-replicated control exists for convex mode only");
  }

  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(trials));
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::string error;
  std::int64_t failed_trial = -1;

  auto worker = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= trials || failed.load()) return;
      try {
        outcomes[static_cast<std::size_t>(i)] = run_trial(config, i, master_seed, options);
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (!failed.exchange(true) || i < failed_trial) {
          failed_trial = i;
          error = e.what();
        }
      }
    }
  };
  const int workers = std::max(1, std::min<int>(options.workers, static_cast<int>(trials)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failed) {
    throw std::runtime_error("trial " + std::to_string(failed_trial) + " (seed " +
                             std::to_string(derive_seed(master_seed, static_cast<std::uint64_t>(failed_trial))) +
                             ") failed: " + error);
  }
  auto summary = summarize(config, master_seed, std::move(outcomes));
  summary.warnings.insert(summary.warnings.begin(), warnings.begin(), warnings.end());
  return summary;
}

struct SweepResult {
  std::vector<BatchSummary> batches;
  stats::LinearFit point_fit;
  stats::LinearFit function_fit;
  std::vector<std::string> warnings;
};

/// ln(median error) against ln(T delta_adv) over the given summaries. A
/// series with a zero median has no logarithm; its fit is all NaN.
inline std::pair<stats::LinearFit, stats::LinearFit> fit_rates(std::span<const BatchSummary> batches) {
  if (batches.size() < 4) throw ParameterError("slope fit needs >= 4 budget points");
  std::vector<double> x, yp, yf;
  for (const auto& b : batches) {
    x.push_back(std::log(b.budget_per_learner()));
    yp.push_back(std::log(b.point_error.q50));
    yf.push_back(std::log(b.function_error.q50));
  }
  auto fit = [&x](const std::vector<double>& y) {
    if (std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); })) return stats::ols(x, y);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return stats::LinearFit{nan, nan, nan, x.size()};
  };
  return {fit(yp), fit(yf)};
}

/// run_batch per budget with a shared master seed (so x* draws coincide
/// across budgets), then OLS of ln(median error) on ln(T delta_adv).
inline SweepResult sweep_budget(const ProtocolConfig& base, std::span<const std::int64_t> budgets,
                                std::int64_t trials, std::uint64_t master_seed, const RunOptions& options = {}) {
  if (budgets.size() < 4) throw ParameterError("sweep_budget: need >= 4 budget points for a slope fit");
  SweepResult result;
  std::int64_t lo = budgets[0], hi = budgets[0];
  for (auto T : budgets) {
    lo = std::min(lo, T);
    hi = std::max(hi, T);
    ProtocolConfig config = base;
    config.T = T;
    result.batches.push_back(run_batch(config, trials, master_seed, options));
  }
  if (std::log10(static_cast<double>(hi) / static_cast<double>(lo)) < 2.0) {
    result.warnings.emplace_back("budgets span less than two decades; slope standard errors are wide");
  }
  std::tie(result.point_fit, result.function_fit) = fit_rates(result.batches);
  if (std::isnan(result.point_fit.slope) || std::isnan(result.function_fit.slope)) {
    result.warnings.emplace_back("a median error is zero; the log-log slope is undefined");
  }
  return result;
}

struct ComparisonRow {
  double budget = 0.0;  // T delta_adv
  double predicted = 0.0;
  double measured = 0.0;
  double ratio = 0.0;
  double allowance = 0.0;
  bool flagged = false;
};

/// Measured median error against the constant-free upper rate. A budget is
/// flagged when measured > predicted * ln(T delta_adv)^log_power.
inline std::vector<ComparisonRow> compare_to_bounds(std::span<const BatchSummary> summaries,
                                                    std::span<const RateReport> reports, ErrorKind kind,
                                                    double log_power = 2.0) {
  if (summaries.size() != reports.size()) throw ParameterError("compare_to_bounds: summary/report count mismatch");
  std::vector<ComparisonRow> rows;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const auto& s = summaries[i];
    const auto& r = reports[i];
    std::string diff;
    auto check = [&diff](const char* name, double a, double b) {
      if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a))) {
        diff += std::string(name) + ": summary " + std::to_string(a) + " vs report " + std::to_string(b) + "; ";
      }
    };
    check("T*delta_adv", s.budget_per_learner(), r.budget * r.delta_adv);
    check("delta_adv", s.config.delta_adv, r.delta_adv);
    check("kappa", s.config.kappa, r.kappa);
    if (!diff.empty()) throw ParameterError("compare_to_bounds: mismatched parameters: " + diff);

    ComparisonRow row;
    row.budget = s.budget_per_learner();
    row.predicted = kind == ErrorKind::Point ? r.point_rate : r.function_rate;
    row.measured = kind == ErrorKind::Point ? s.point_error.q50 : s.function_error.q50;
    row.ratio = row.measured / row.predicted;
    row.allowance = std::pow(std::log(row.budget), log_power);
    row.flagged = row.measured > row.predicted * row.allowance;
    rows.push_back(row);
  }
  return rows;
}

inline constexpr const char* kCsvHeader =
    "trial,seed,T,delta_adv,eps_adv,eps,delta,kappa,sigma_or_p,mode,point_error,function_error,"
    "adv_prop_success,adv_pack_success,adv_post_success,adv_naive_success,queries_used,ms";

/// Noise parameter reported in the sigma_or_p column (1 for the exact sign oracle).
inline double noise_parameter(const ProtocolConfig& c) {
  switch (c.mode) {
    case Mode::ConvexEpochGD: return c.sigma;
    case Mode::NoisyBisection: return c.p;
    case Mode::Bisection: return 1.0;
  }
  return 0.0;
}

/// CSV rows sorted by trial id.
inline void write_csv(std::ostream& os, const BatchSummary& summary, bool header = true) {
  if (header) os << kCsvHeader << '\n';
  const auto& c = summary.config;
  char buf[1024];
  for (const auto& o : summary.outcomes) {
    std::snprintf(buf, sizeof buf,
                  "%lld,%llu,%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%lld,%.3f\n",
                  static_cast<long long>(o.trial), static_cast<unsigned long long>(o.seed),
                  static_cast<long long>(c.T), c.delta_adv, c.eps_adv, c.eps, c.delta, c.kappa, noise_parameter(c),
                  to_string(c.mode), o.point_error, o.function_error, o.adv_success[0], o.adv_success[1],
                  o.adv_success[2], o.adv_success[3], static_cast<long long>(o.queries_used), o.ms);
    os << buf;
  }
}

}  // namespace secopt
