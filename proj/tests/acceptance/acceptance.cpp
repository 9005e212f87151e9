// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "secopt/secopt.hpp"

namespace {

using namespace secopt;

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

// Per-phase offsets, one gradient per phase, K queries per subinterval and
// the EpochGd schedule over at least six epochs.
Verdict symmetry_and_structure() {
  Verdict v;
  int runs = 0;
  for (double delta_adv : {0.1, 0.2, 0.25, 0.3}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      ProtocolConfig c;
      c.T = 20000 + static_cast<std::int64_t>(seed) * 137;
      c.delta_adv = delta_adv;
      c.eps_adv = delta_adv / 2.5;
      c.eps = c.eps_adv / 2.0;
      RngStream xr(seed, 0), pr(seed, 1);
      const auto tr = run_secure_convex(c, make_uniformly_convex(2.0, 1.0, xr.uniform(0.05, 0.95)), pr);
      const int S = c.S();
      const std::int64_t K = c.T / S;
      std::map<int, std::int64_t> counts;
      bool ok = tr.queries_used() == K * S && tr.effective_gradients == K;
      for (std::int64_t k = 0; k < K && ok; ++k) {
        const auto* first = &tr.entries[static_cast<std::size_t>(k * S)];
        const double offset = first->x - (first->subinterval - 1) * delta_adv;
        int informative = 0;
        for (int s = 0; s < S; ++s) {
          const auto& e = first[s];
          ok = ok && std::abs(e.x - (e.subinterval - 1) * delta_adv - offset) <= 1e-12 && e.phase == k + 1;
          informative += e.informative;
          ++counts[e.subinterval];
        }
        ok = ok && informative == 1;
      }
      ok = ok && static_cast<int>(counts.size()) == S;
      for (const auto& [s, n] : counts) ok = ok && n == K;
      if (!ok) {
        v.pass = false;
        v.detail = "replication broken at delta_adv=" + fmt("%g", delta_adv) + " seed " + std::to_string(seed);
        return v;
      }
      ++runs;
    }
  }

  EpochGdParams p;
  p.budget = 200000;
  p.w = 1.0;
  p.overrides.c0 = 2.0;
  p.overrides.c2 = 0.01;
  EpochGd gd(p);
  const auto f = make_uniformly_convex(2.0, 1.0, 0.3);
  RngStream rng(8);
  const double shrink = std::pow(2.0, -p.kappa / (2.0 * p.kappa - 2.0));
  int epoch = gd.epoch(), transitions = 0;
  double step = gd.step_size(), anchor = gd.estimate(), radius = gd.radius();
  std::int64_t length = gd.epoch_length();
  while (!gd.finished()) {
    gd.feed(gaussian_first_order(f, gd.propose(), 0.5, rng).signal());
    if (gd.finished()) break;
    if (gd.epoch() != epoch) {
      ++transitions;
      const bool ok = gd.epoch_length() == 2 * length && std::abs(gd.step_size() - step * shrink) <= 1e-15 &&
                      std::abs(gd.radius() - std::pow(gd.c2() * gd.step_size() / p.lambda, 0.5)) <= 1e-15;
      if (!ok) return {false, "schedule ratio broken at epoch " + std::to_string(gd.epoch())};
      epoch = gd.epoch();
      step = gd.step_size();
      length = gd.epoch_length();
      anchor = gd.estimate();
      radius = gd.radius();
    }
    if (gd.current() < std::max(0.0, anchor - radius) - 1e-15 || gd.current() > std::min(1.0, anchor + radius) + 1e-15 ||
        gd.consumed() > gd.scheduled()) {
      return {false, "iterate left the feasible set"};
    }
  }
  if (transitions < 6) return {false, "only " + std::to_string(transitions) + " epoch transitions"};
  v.detail = std::to_string(runs) + " transcripts exact, " + std::to_string(transitions) + " epoch transitions";
  return v;
}

ProtocolConfig rate_config() {
  ProtocolConfig c;
  c.kappa = 2.0;
  c.sigma = 0.1;
  c.lambda = 1.0;
  c.w = 2.0;
  c.delta_adv = 0.1;
  c.eps_adv = 0.04;
  return c;
}

Verdict accuracy_rate() {
  std::vector<std::int64_t> budgets;
  for (int k = 12; k <= 17; ++k) budgets.push_back((std::int64_t{1} << k) * 10);  // T delta_adv = 2^k
  const auto sweep = sweep_budget(rate_config(), budgets, 100, 2024, RunOptions{workers(), false, true});
  const double ps = sweep.point_fit.slope, fs = sweep.function_fit.slope;
  Verdict v;
  v.pass = ps >= -0.7 && ps <= -0.3 && fs >= -1.3 && fs <= -0.7;
  v.detail = "point slope " + fmt("%.3f", ps) + fmt(" (se %.3f)", sweep.point_fit.slope_se) + ", function slope " +
             fmt("%.3f", fs) + fmt(" (se %.3f)", sweep.function_fit.slope_se);
  return v;
}

Verdict privacy() {
  auto c = rate_config();
  c.T = 200000;
  c.adversary_samples = 50;
  const auto secure = run_batch(c, 200, 77, RunOptions{workers(), false, true});
  Verdict v;
  const char* names[] = {"prop", "pack", "post", "naive"};
  for (std::size_t a = 0; a < 4; ++a) {
    const bool ok = secure.adv_rate[a] <= c.delta_adv + 3.0 * secure.adv_se[a];
    v.pass = v.pass && ok;
    v.detail += std::string(names[a]) + fmt(" %.4f ", secure.adv_rate[a]);
  }
  v.pass = v.pass && secure.adv_pairs >= 10000;
  const auto control = run_batch(c, 200, 77, RunOptions{workers(), false, false});
  v.pass = v.pass && control.adv_rate[0] > 3.0 * c.delta_adv;
  v.detail += "over " + std::to_string(secure.adv_pairs) + " pairs; unreplicated prop " +
              fmt("%.4f", control.adv_rate[0]);
  return v;
}

Verdict binary_scaling() {
  Verdict v;
  double lo = 1e300, hi = 0.0;
  int cells = 0;
  for (double delta_adv : {0.1, 0.2, 0.25, 0.05}) {
    for (double adv_div : {2.0, 4.0}) {
      const double eps_adv = delta_adv / adv_div;
      for (double eps_div : {2.0, 10.0, 100.0, 1000.0}) {
        // log2(delta_adv/eps) outgrows ln(eps_adv/eps) by more than 4x here
        if (adv_div == 4.0 && eps_div < 10.0) continue;
        ProtocolConfig c;
        c.mode = Mode::Bisection;
        c.delta_adv = delta_adv;
        c.eps_adv = eps_adv * (1.0 - 1e-12);  // protocol wants 2 eps_adv < delta_adv strictly
        c.eps = c.eps_adv / eps_div;
        c.delta = 0.05;
        c.T = 100000000;
        const int S = c.S();
        const std::int64_t expected = S * bisection_levels(delta_adv, c.eps);
        RngStream xr(static_cast<std::uint64_t>(cells));
        for (int trial = 0; trial < 20; ++trial) {
          const double x_star = xr.uniform();
          RngStream rng(static_cast<std::uint64_t>(cells), static_cast<std::uint64_t>(trial));
          const auto tr = run_secure_bisection(c, make_abs(x_star), rng);
          if (tr.queries_used() != expected || std::abs(tr.estimate - x_star) > c.eps) {
            return {false, "bisection off at delta_adv=" + fmt("%g", delta_adv) + " eps=" + fmt("%g", c.eps)};
          }
        }
        const auto bound = lower_bound_binary(c.eps, c.eps_adv, c.delta, delta_adv);
        if (!bound.warnings.empty()) return {false, "grid cell violates the bound preconditions"};
        const double ratio = static_cast<double>(expected) / bound.value;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        ++cells;
      }
    }
  }
  v.pass = lo >= 0.25 && hi <= 4.0;
  v.detail = std::to_string(cells) + " grid cells, queries/bound in [" + fmt("%.3f", lo) + ", " + fmt("%.3f", hi) + "]";
  return v;
}

Verdict noisy_bisection() {
  Verdict v;
  std::map<double, double> adjusted;
  for (double p : {0.6, 0.75, 0.9}) {
    ProtocolConfig c;
    c.mode = Mode::NoisyBisection;
    c.p = p;
    c.eps = 1e-3;
    c.eps_adv = 0.04;
    c.delta = 0.05;
    c.T = 10000000;
    const auto s = run_batch(c, 400, 31, RunOptions{workers(), false, true});
    double queries = 0.0;
    for (const auto& o : s.outcomes) queries += static_cast<double>(o.queries_used);
    queries /= static_cast<double>(s.trials);
    adjusted[p] = queries * c_of_p(p);
    if (p == 0.75) {
      v.pass = s.delta_hat <= c.delta + 3.0 * s.delta_hat_se;
      v.detail = "p=0.75 delta_hat " + fmt("%.4f", s.delta_hat) + fmt(" at %.0f queries; ", queries);
    }
  }
  const double ref = adjusted[0.75];
  for (const auto& [p, q] : adjusted) {
    const double ratio = q / ref;
    v.pass = v.pass && ratio >= 0.5 && ratio <= 2.0;
    v.detail += fmt("Q*c(p) ratio at p=%g ", p) + fmt("%.3f ", ratio);
  }
  return v;
}

Verdict hard_pair_kl() {
  const auto pair = make_hard_pair(0.5, 0.2, 0.0005, 0.05, 0.5, 1);
  int outside = 0;
  for (int i = 0; i <= 1000; ++i) {
    const Point x{i / 1000.0};
    const bool out = pair.outside_region(x);
    if (out) {
      ++outside;
      if (pair.f1.eval(x) != pair.f2.eval(x) || pair.f1.subgrad(x) != pair.f2.subgrad(x)) {
        return {false, "pair differs outside J at x=" + fmt("%g", x[0])};
      }
      if (kl_gaussian_pair(pair, x, 0.1) != 0.0) return {false, "nonzero KL outside J"};
    }
  }
  RngStream rng(99);
  double worst_sym = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Point x{rng.uniform()};
    worst_sym = std::max(worst_sym, std::abs(kl_gaussian(pair.f1, pair.f2, x, 0.1) - kl_gaussian(pair.f2, pair.f1, x, 0.1)));
  }
  const double sigma = 0.01;
  double worst_rel = 0.0;
  for (int i = 0; i < 10; ++i) {
    const Point x{rng.uniform(0.41, 0.59)};
    const double m1[2] = {pair.f1.eval(x), pair.f1.subgrad(x)[0]};
    const double m2[2] = {pair.f2.eval(x), pair.f2.subgrad(x)[0]};
    double acc = 0.0;
    const int n = 100000;
    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < 2; ++j) {
        const double y = rng.normal(m1[j], sigma);
        acc += ((y - m2[j]) * (y - m2[j]) - (y - m1[j]) * (y - m1[j])) / (2.0 * sigma * sigma);
      }
    }
    const double formula = kl_gaussian_pair(pair, x, sigma);
    worst_rel = std::max(worst_rel, std::abs(acc / n - formula) / formula);
  }
  Verdict v;
  v.pass = worst_sym < 1e-12 && worst_rel <= 0.05;
  v.detail = std::to_string(outside) + " grid points outside J identical; KL sample error " +
             fmt("%.4f", worst_rel) + ", asymmetry " + fmt("%.1e", worst_sym);
  return v;
}

Verdict reproducibility() {
  auto csv = [](const ProtocolConfig& c, int w) {
    std::ostringstream os;
    write_csv(os, run_batch(c, 64, 4242, RunOptions{w, false, true}));
    return os.str();
  };
  auto convex = rate_config();
  convex.T = 40000;
  ProtocolConfig noisy;
  noisy.mode = Mode::NoisyBisection;
  noisy.T = 100000;
  noisy.eps = 1e-3;
  Verdict v;
  std::size_t bytes = 0;
  for (const auto& c : {convex, noisy}) {
    const auto a = csv(c, 1);
    const auto b = csv(c, 8);
    v.pass = v.pass && a == b;
    bytes += a.size();
  }
  v.detail = std::to_string(bytes) + " CSV bytes identical across 1 and 8 workers";
  return v;
}

Verdict goldens() {
  struct Row {
    const char* name;
    double got;
    double want;
  };
  const Row rows[] = {
      {"c(0.75)", c_of_p(0.75), 0.549306144334054845},
      {"convex bound", lower_bound_convex(0.01, 0.01, 0.1, 2.0, 0.1, ErrorKind::Point).value, 637.145646205098},
      {"C0", epoch_gd_c0(100000, 0.01), 2142.2544566527605},
  };
  Verdict v;
  for (const auto& r : rows) {
    const double rel = std::abs(r.got - r.want) / std::abs(r.want);
    v.pass = v.pass && rel <= 1e-6;
    v.detail += std::string(r.name) + fmt(" %.10g ", r.got);
  }
  return v;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"symmetry and structure", symmetry_and_structure},
      {"accuracy rate", accuracy_rate},
      {"privacy", privacy},
      {"binary search scaling", binary_scaling},
      {"noisy bisection", noisy_bisection},
      {"hard pair and KL", hard_pair_kl},
      {"reproducibility", reproducibility},
      {"formula goldens", goldens},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d %-24s %s  %s  [%.1fs]\n", index, name, v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !v.pass;
  }
  return failures == 0 ? 0 : 1;
}
