// secopt: Monte Carlo driver for the replicated-query protocol.
//
//   secopt run --config cfg.json --seed 1 --trials 200 --out runs.csv
//   secopt sweep --seed 1 --budgets 40960,81920,163840,327680 --trials 100
//   secopt bounds --budgets 1e4,1e5,1e6
//   secopt export-transcript --seed 1 --trial 3 --public --out t.csv
//   secopt adversary-eval --transcript t.csv --x-star 0.42 --samples 1000
//
// Any ProtocolConfig field can be set with --key=value after the subcommand,
// e.g. --eps_adv=0.04 --overrides.C0=2. Exit codes: 0 ok, 2 bad parameters
// or input, 3 a --check threshold failed.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "secopt/secopt.hpp"

namespace {

using namespace secopt;

constexpr int kExitParameter = 2;
constexpr int kExitCheck = 3;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::int64_t trials = 100;
  std::string out;
  bool check = false;
  bool omit_timing = false;
};

ProtocolConfig build_config(const Common& common, const std::vector<std::string>& extras) {
  ProtocolConfig config = common.config_path.empty() ? ProtocolConfig{} : load_config(common.config_path);
  for (const auto& arg : extras) {
    if (arg.rfind("--", 0) != 0 || arg.find('=') == std::string::npos) {
      throw ParameterError("unexpected argument '" + arg + "' (overrides are --key=value)");
    }
    const auto eq = arg.find('=');
    apply_override(config, arg.substr(2, eq - 2), arg.substr(eq + 1));
  }
  if (common.seed) config.seed = *common.seed;
  return config;
}

std::vector<std::int64_t> parse_budgets(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || *end != '\0' || v < 1.0) throw ParameterError("bad budget '" + item + "'");
    out.push_back(static_cast<std::int64_t>(std::llround(v)));
  }
  if (out.empty()) throw ParameterError("no budgets given");
  return out;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

const char* kAdversaryNames[] = {"proportional", "packing_ball", "posterior", "uniform_naive"};

void print_summary(std::ostream& os, const BatchSummary& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "mode=%s T=%lld delta_adv=%g eps=%g trials=%lld seed=%llu\n",
                to_string(s.config.mode), static_cast<long long>(s.config.T), s.config.delta_adv, s.config.eps,
                static_cast<long long>(s.trials), static_cast<unsigned long long>(s.master_seed));
  os << buf;
  std::snprintf(buf, sizeof buf, "delta_hat %.4f (se %.4f, target %g)\n", s.delta_hat, s.delta_hat_se,
                s.config.delta);
  os << buf;
  std::snprintf(buf, sizeof buf, "point_error    q10 %.3e  q50 %.3e  q90 %.3e\n", s.point_error.q10,
                s.point_error.q50, s.point_error.q90);
  os << buf;
  std::snprintf(buf, sizeof buf, "function_error q10 %.3e  q50 %.3e  q90 %.3e\n", s.function_error.q10,
                s.function_error.q50, s.function_error.q90);
  os << buf;
  for (std::size_t a = 0; a < 4; ++a) {
    std::snprintf(buf, sizeof buf, "adv %-14s %.4f (se %.4f, %lld pairs)\n", kAdversaryNames[a], s.adv_rate[a],
                  s.adv_se[a], static_cast<long long>(s.adv_pairs));
    os << buf;
  }
}

// delta_hat within delta + 3 SE and every adversary within delta_adv + 3 SE.
bool batch_passes(const BatchSummary& s, std::ostream& os) {
  bool ok = true;
  if (s.delta_hat > s.config.delta + 3.0 * s.delta_hat_se) {
    os << "check failed: delta_hat " << s.delta_hat << " above " << s.config.delta << " + 3 se\n";
    ok = false;
  }
  for (std::size_t a = 0; a < 4; ++a) {
    if (s.adv_rate[a] > s.config.delta_adv + 3.0 * s.adv_se[a]) {
      os << "check failed: " << kAdversaryNames[a] << " success " << s.adv_rate[a] << " above delta_adv + 3 se\n";
      ok = false;
    }
  }
  return ok;
}

int cmd_run(const Common& common, const ProtocolConfig& config) {
  const RunOptions options{common.workers, !common.omit_timing, true};
  const auto summary = run_batch(config, common.trials, config.seed, options);
  print_warnings(summary.warnings);
  if (common.out.empty()) {
    write_csv(std::cout, summary);
    print_summary(std::cerr, summary);
  } else {
    std::ofstream f(common.out);
    if (!f) throw ParameterError("cannot write '" + common.out + "'");
    write_csv(f, summary);
    print_summary(std::cout, summary);
  }
  if (common.check && !batch_passes(summary, std::cerr)) return kExitCheck;
  return 0;
}

int cmd_sweep(const Common& common, const ProtocolConfig& config, const std::string& budgets_text) {
  if (config.mode != Mode::ConvexEpochGD) throw ParameterError("sweep: only convex mode has a rate to fit");
  const auto budgets = parse_budgets(budgets_text);
  const RunOptions options{common.workers, !common.omit_timing, true};
  const auto result = sweep_budget(config, budgets, common.trials, config.seed, options);
  for (const auto& b : result.batches) print_warnings(b.warnings);
  print_warnings(result.warnings);

  std::printf("%12s %12s %12s %12s %12s\n", "T", "T*delta_adv", "point_q50", "func_q50", "delta_hat");
  for (const auto& b : result.batches) {
    std::printf("%12lld %12.0f %12.4e %12.4e %12.4f\n", static_cast<long long>(b.config.T), b.budget_per_learner(),
                b.point_error.q50, b.function_error.q50, b.delta_hat);
  }
  const auto [fe, pe] = upper_bound_exponents(config.kappa);
  std::printf("point slope    %+.3f (se %.3f, rate %+.3f)\n", result.point_fit.slope, result.point_fit.slope_se, -pe);
  std::printf("function slope %+.3f (se %.3f, rate %+.3f)\n", result.function_fit.slope,
              result.function_fit.slope_se, -fe);

  if (!common.out.empty()) {
    std::ofstream f(common.out);
    if (!f) throw ParameterError("cannot write '" + common.out + "'");
    for (std::size_t i = 0; i < result.batches.size(); ++i) write_csv(f, result.batches[i], i == 0);
  }
  if (common.check) {
    // slopes within 0.2 (point) and 0.3 (function) of the rate exponents
    const bool ok = std::abs(result.point_fit.slope + pe) <= 0.2 && std::abs(result.function_fit.slope + fe) <= 0.3;
    if (!ok) {
      std::cerr << "check failed: fitted slopes outside the rate bands\n";
      return kExitCheck;
    }
  }
  return 0;
}

int cmd_bounds(const ProtocolConfig& config, const std::string& budgets_text) {
  const auto budgets = parse_budgets(budgets_text);
  const auto binary = lower_bound_binary(config.eps, config.eps_adv, config.delta, config.delta_adv);
  std::printf("lower bound, binary search:         %.6g\n", binary.value);
  print_warnings(binary.warnings);
  if (config.p > 0.5 && config.p < 1.0) {
    std::printf("lower bound, noisy search (p=%g):  %.6g   c(p)=%.6g\n", config.p,
                lower_bound_noisy(config.eps, config.eps_adv, config.delta, config.delta_adv, config.p).value,
                c_of_p(config.p));
  }
  const auto first = convex_rate_report(static_cast<double>(budgets.front()), config);
  std::printf("lower bound, convex (%s error):  %.6g\n", config.error_kind == ErrorKind::Point ? "point" : "function",
              first.lower_bound);
  for (const auto& n : first.notes) std::printf("  note: %s\n", n.c_str());
  std::printf("\n%14s %14s %14s %14s\n", "T", "T*delta_adv", "function_rate", "point_rate");
  for (auto T : budgets) {
    const auto r = convex_rate_report(static_cast<double>(T), config);
    std::printf("%14lld %14.6g %14.6e %14.6e\n", static_cast<long long>(T), r.budget * r.delta_adv,
                r.function_rate, r.point_rate);
  }
  std::printf("exponents: function %+.4f, point %+.4f\n", first.function_exponent, first.point_exponent);
  return 0;
}

int cmd_export(const Common& common, const ProtocolConfig& config, std::int64_t trial, bool public_only) {
  const auto seed = derive_seed(config.seed, static_cast<std::uint64_t>(trial));
  RngStream x_rng(seed, 0);
  RngStream protocol_rng(seed, 1);
  const double x_star = draw_x_star(config, x_rng);
  const auto transcript = run_protocol(config, trial_objective(config, x_star), protocol_rng);
  if (common.out.empty()) {
    write_transcript(std::cout, transcript, public_only);
  } else {
    std::ofstream f(common.out);
    if (!f) throw ParameterError("cannot write '" + common.out + "'");
    write_transcript(f, transcript, public_only);
  }
  std::fprintf(stderr, "trial %lld seed %llu x_star %.17g estimate %.17g queries %lld\n",
               static_cast<long long>(trial), static_cast<unsigned long long>(seed), x_star, transcript.estimate,
               static_cast<long long>(transcript.queries_used()));
  return 0;
}

int cmd_adversary_eval(const Common& common, const ProtocolConfig& config, const std::string& path, double x_star,
                       int samples) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open transcript '" + path + "'");
  const auto stored = read_transcript(in);
  if (stored.entries.empty()) throw InputError("transcript has no queries");
  if (samples <= 0) throw ParameterError("--samples must be positive");
  const auto view = stored.public_view();
  const double delta_adv = stored.delta_adv > 0.0 ? stored.delta_adv : config.delta_adv;
  const int S = stored.S > 0 ? stored.S : num_subintervals(delta_adv);
  const auto centers = packing_centers(config.eps_adv);

  std::printf("queries %zu  S %d  delta_adv %g  eps_adv %g  x_star %g\n", view.size(), S, delta_adv, config.eps_adv,
              x_star);
  bool ok = true;
  for (std::size_t a = 0; a < 4; ++a) {
    RngStream rng(config.seed, 2 + a);
    int hits = 0, fallbacks = 0;
    for (int k = 0; k < samples; ++k) {
      AdversaryEstimate est;
      switch (kAdversaries[a]) {
        case Strategy::Proportional: est = proportional_sample(view, rng); break;
        case Strategy::PackingBall: est = packing_ball_sample(view, config.eps_adv, centers, rng); break;
        case Strategy::PosteriorInterval:
          est = posterior_interval_adversary(view, config.eps, S, rng, delta_adv);
          break;
        case Strategy::UniformNaive: est = uniform_naive(rng); break;
      }
      hits += adversary_success(est.point, x_star, config.eps_adv) ? 1 : 0;
      fallbacks += est.fallback ? 1 : 0;
    }
    const double rate = static_cast<double>(hits) / samples;
    const double se = stats::binomial_se(rate, samples);
    std::printf("%-14s success %.4f (se %.4f)  fallbacks %d\n", kAdversaryNames[a], rate, se, fallbacks);
    ok = ok && rate <= delta_adv + 3.0 * se;
  }
  if (common.check && !ok) {
    std::cerr << "check failed: an adversary beat delta_adv + 3 se\n";
    return kExitCheck;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo simulator for secure stochastic convex optimization"};
  app.require_subcommand(1);
  Common common;

  auto add_common = [&common](CLI::App* sub, bool needs_seed) {
    sub->add_option("--config", common.config_path, "JSON config file")->check(CLI::ExistingFile);
    auto* seed = sub->add_option("--seed", common.seed, "master seed");
    if (needs_seed) seed->required();
    sub->add_option("--out", common.out, "output file");
    sub->allow_extras();
  };

  auto* run = app.add_subcommand("run", "run one batch of trials");
  add_common(run, true);
  run->add_option("--trials", common.trials, "number of trials")->check(CLI::PositiveNumber);
  run->add_option("--workers", common.workers, "worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--check", common.check, "exit 3 unless accuracy and privacy hold within 3 SE");
  run->add_flag("--omit-timing", common.omit_timing, "write ms=0 for byte-reproducible CSV");

  auto* sweep = app.add_subcommand("sweep", "budget sweep with log-log slope fit");
  add_common(sweep, true);
  std::string budgets = "40960,81920,163840,327680,655360,1310720";
  sweep->add_option("--budgets", budgets, "comma-separated T values");
  sweep->add_option("--trials", common.trials, "trials per budget")->check(CLI::PositiveNumber);
  sweep->add_option("--workers", common.workers, "worker threads")->check(CLI::PositiveNumber);
  sweep->add_flag("--check", common.check, "exit 3 unless slopes sit near the rate exponents");
  sweep->add_flag("--omit-timing", common.omit_timing, "write ms=0 for byte-reproducible CSV");

  auto* bounds = app.add_subcommand("bounds", "lower bounds and upper rates");
  add_common(bounds, false);
  std::string bound_budgets = "1e4,1e5,1e6,1e7";
  bounds->add_option("--budgets", bound_budgets, "comma-separated T values");

  auto* eval = app.add_subcommand("adversary-eval", "adversary success on a stored transcript");
  add_common(eval, false);
  std::string transcript_path;
  double x_star = 0.0;
  int samples = 1000;
  eval->add_option("--transcript", transcript_path, "transcript file")->required();
  eval->add_option("--x-star", x_star, "true optimizer")->required()->check(CLI::Range(0.0, 1.0));
  eval->add_option("--samples", samples, "draws per adversary");
  eval->add_flag("--check", common.check, "exit 3 if an adversary beats delta_adv + 3 SE");

  auto* exp = app.add_subcommand("export-transcript", "write one trial's transcript");
  add_common(exp, false);
  std::int64_t trial = 0;
  bool public_only = false;
  exp->add_option("--trial", trial, "trial id")->check(CLI::NonNegativeNumber);
  exp->add_flag("--public", public_only, "write only what the adversary sees");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParameter;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const ProtocolConfig config = build_config(common, sub->remaining());
    print_warnings(config.validate());
    if (sub == run) return cmd_run(common, config);
    if (sub == sweep) return cmd_sweep(common, config, budgets);
    if (sub == bounds) return cmd_bounds(config, bound_budgets);
    if (sub == eval) return cmd_adversary_eval(common, config, transcript_path, x_star, samples);
    return cmd_export(common, config, trial, public_only);
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParameter;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParameter;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParameter;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
