#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>

#include "secopt/errors.hpp"

namespace secopt {

enum class LogBase { Two, Natural };

/// Replacements for the schedule constants; unset entries keep the defaults.
struct EpochGdOverrides {
  std::optional<double> c0;
  std::optional<double> c1;
  std::optional<double> c2;
  /// Base of the inner logarithm in C0 (it counts doubling epochs).
  LogBase c0_inner_log = LogBase::Two;
};

struct EpochGdParams {
  double kappa = 2.0;
  double lambda = 1.0;
  double delta = 0.05;
  /// Subgradient bound (also used where the step-size constant names G).
  double w = 1.0;
  /// Number of gradients the learner may consume.
  std::int64_t budget = 1;
  double x_init = 0.5;
  EpochGdOverrides overrides;
};

/// C0 = 288 ln( floor(log(budget) + 1) / delta ).
inline double epoch_gd_c0(std::int64_t budget, double delta, LogBase inner = LogBase::Two) {
  const double b = static_cast<double>(budget);
  const double epochs = std::floor((inner == LogBase::Two ? std::log2(b) : std::log(b)) + 1.0);
  return 288.0 * std::log(std::max(epochs, 1.0) / delta);
}

/// C1 = W^{(2-k)/(k-1)} 2^{k/(2(k-1)^2)} / lambda^{1/(k-1)}.
inline double epoch_gd_c1(double kappa, double lambda, double w) {
  return std::pow(w, (2.0 - kappa) / (kappa - 1.0)) * std::pow(2.0, kappa / (2.0 * (kappa - 1.0) * (kappa - 1.0))) /
         std::pow(lambda, 1.0 / (kappa - 1.0));
}

/// C2 = 2^{k/(2k-2)} W^2.
inline double epoch_gd_c2(double kappa, double w) { return std::pow(2.0, kappa / (2.0 * kappa - 2.0)) * w * w; }

/// x - step * g projected onto [0,1] ∩ [anchor - radius, anchor + radius].
inline double projected_step(double x, double step, double g, double anchor, double radius) {
  return std::clamp(x - step * g, std::max(0.0, anchor - radius), std::min(1.0, anchor + radius));
}

/// Epoch-doubling projected stochastic gradient method on [0, 1].
///
/// An epoch closes on its last feed, so estimate() always reflects every
/// completed epoch.
///
/// Resumable: the caller alternates propose() (where the next gradient is
/// wanted) and feed() (the gradient observed there). Epoch e runs T_e steps
/// with step size eta_e inside [0,1] ∩ [anchor - R_e, anchor + R_e]; its
/// iterate average becomes the next anchor, then T doubles and eta shrinks
/// by 2^{-k/(2k-2)}. Stops once the next epoch would exceed the budget.
class EpochGd {
 public:
  explicit EpochGd(const EpochGdParams& params) : params_(params) {
    detail::require(params.kappa > 1.0, "EpochGd: kappa must be > 1");
    detail::require(params.lambda > 0.0, "EpochGd: lambda must be positive");
    detail::require(params.delta > 0.0 && params.delta < 1.0, "EpochGd: delta must lie in (0,1)");
    detail::require(params.w > 0.0, "EpochGd: W must be positive");
    detail::require(params.budget >= 1, "EpochGd: budget must be >= 1");
    detail::require(params.x_init >= 0.0 && params.x_init <= 1.0, "EpochGd: x_init must lie in [0,1]");

    const auto& ov = params.overrides;
    c0_ = ov.c0.value_or(epoch_gd_c0(params.budget, params.delta, ov.c0_inner_log));
    c1_ = ov.c1.value_or(epoch_gd_c1(params.kappa, params.lambda, params.w));
    c2_ = ov.c2.value_or(epoch_gd_c2(params.kappa, params.w));
    detail::require(c0_ > 0.0 && c1_ > 0.0 && c2_ > 0.0, "EpochGd: constants must be positive");

    shrink_ = std::pow(2.0, -params.kappa / (2.0 * params.kappa - 2.0));
    epoch_length_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(2.0 * c0_)));
    first_epoch_length_ = epoch_length_;
    step_ = c1_ * shrink_;
    radius_ = radius_for(step_);
    anchor_ = params.x_init;
    current_ = anchor_;
    scheduled_ = epoch_length_;
    finished_ = scheduled_ > params.budget;
  }

  /// Point at which the next gradient is wanted. Idempotent until feed().
  double propose() {
    awaiting_feed_ = true;
    return finished_ ? anchor_ : current_;
  }

  /// Gradient observed at the last proposed point. Ignored once finished.
  void feed(double gradient) {
    if (!awaiting_feed_) throw ProtocolOrderError("EpochGd::feed called before propose");
    awaiting_feed_ = false;
    if (finished_) return;
    epoch_sum_ += current_;
    current_ = projected_step(current_, step_, gradient, anchor_, radius_);
    ++step_in_epoch_;
    ++consumed_;
    if (step_in_epoch_ > epoch_length_) close_epoch();
  }

  /// Current anchor: the last completed epoch average (x_init before any).
  double estimate() const { return anchor_; }

  bool finished() const { return finished_; }
  int epoch() const { return epoch_; }
  /// 1-based index of the next step within the current epoch.
  std::int64_t step_in_epoch() const { return step_in_epoch_; }
  std::int64_t epoch_length() const { return epoch_length_; }
  std::int64_t first_epoch_length() const { return first_epoch_length_; }
  double step_size() const { return step_; }
  double radius() const { return radius_; }
  double current() const { return current_; }
  std::int64_t consumed() const { return consumed_; }
  /// Sum of the lengths of all epochs started so far.
  std::int64_t scheduled() const { return scheduled_; }
  double c0() const { return c0_; }
  double c1() const { return c1_; }
  double c2() const { return c2_; }
  const EpochGdParams& params() const { return params_; }

  /// Radius for a given step size: (C2 eta / lambda)^{1/k}.
  double radius_for(double step) const { return std::pow(c2_ * step / params_.lambda, 1.0 / params_.kappa); }

 private:
  void close_epoch() {
    anchor_ = epoch_sum_ / static_cast<double>(epoch_length_);
    const std::int64_t next_length = 2 * epoch_length_;
    if (scheduled_ + next_length > params_.budget) {
      finished_ = true;
      current_ = anchor_;
      return;
    }
    scheduled_ += next_length;
    epoch_length_ = next_length;
    step_ *= shrink_;
    radius_ = radius_for(step_);
    ++epoch_;
    step_in_epoch_ = 1;
    epoch_sum_ = 0.0;
    current_ = anchor_;
  }

  EpochGdParams params_;
  double c0_ = 0.0, c1_ = 0.0, c2_ = 0.0;
  double shrink_ = 0.5;
  std::int64_t epoch_length_ = 1;
  std::int64_t first_epoch_length_ = 1;
  double step_ = 0.0;
  double radius_ = 0.0;
  double anchor_ = 0.0;
  double current_ = 0.0;
  double epoch_sum_ = 0.0;
  int epoch_ = 1;
  std::int64_t step_in_epoch_ = 1;
  std::int64_t consumed_ = 0;
  std::int64_t scheduled_ = 0;
  bool finished_ = false;
  bool awaiting_feed_ = false;
};

}  // namespace secopt
