// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <boost/math/special_functions/expint.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "wiretap/bounds.hpp"
#include "wiretap/config.hpp"
#include "wiretap/opt.hpp"
#include "wiretap/rates.hpp"
#include "wiretap/sim.hpp"
#include "wiretap/sweep.hpp"

using namespace wiretap;

namespace {

const std::vector<double> kSnrGrid{-5, 0, 5, 10, 15, 20, 25, 30};
const FadingDistribution kUnit = FadingDistribution::exponential(1.0);

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!out.pass) ++failures;
  std::printf("%s %2d %s: %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", id, name.c_str(),
              out.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Rows keyed by (K, b, snr) for one bound kind.
using Curve = std::map<std::tuple<int, int, double>, double>;

Curve curve(const std::vector<SweepRow>& rows, BoundKind kind) {
  Curve c;
  for (const auto& r : rows) {
    if (r.kind == kind) c[{r.K, r.b, r.snr_db}] = r.value;
  }
  return c;
}

// Rows shared by several criteria.
std::vector<SweepRow> fig_common_rows;
std::vector<SweepRow> fig_sum_rows;
std::vector<SweepRow> asymptotic_rows;

// e^y E1(y), switching to the asymptotic series where e^y overflows.
double scaled_e1(double y) {
  if (y < 50.0) return std::exp(y) * boost::math::expint(1, y);
  const double r = 1.0 / y;
  return r * (1.0 - r + 2.0 * r * r - 6.0 * r * r * r + 24.0 * r * r * r * r);
}

// Lower-bound cell gain with an Exp(1) eavesdropper, closed form.
double oracle_gain(double tau, double P) {
  if (P <= 0.0 || tau <= 0.0) return 0.0;
  const double x = 1.0 / P;
  return std::log1p(tau * P) - (scaled_e1(x) - std::exp(-tau) * scaled_e1(x + tau));
}

// Exhaustive search over (t1, t2, a1, a2) with P_q = a_q P_avg / theta_q and
// a1 + a2 <= 1, zooming around the incumbent.
double brute_force_one_bit(double P_avg) {
  const int n = 50;
  double lo[4] = {0.0, 0.0, 0.0, 0.0};
  double hi[4] = {4.0, 8.0, 1.0, 1.0};
  double best = 0.0;
  double arg[4] = {1.0, 2.0, 0.5, 0.5};
  for (int zoom = 0; zoom < 4; ++zoom) {
    std::vector<double> axis[4];
    for (int d = 0; d < 4; ++d) {
      for (int i = 0; i < n; ++i) axis[d].push_back(lo[d] + (hi[d] - lo[d]) * i / (n - 1));
    }
    for (double t1 : axis[0]) {
      if (t1 <= 0.0) continue;
      for (double t2 : axis[1]) {
        if (t2 <= t1) continue;
        const double th1 = std::exp(-t1) - std::exp(-t2);
        const double th2 = std::exp(-t2);
        // Tabulate the per-cell gains once per (t1, t2).
        double g1[n], g2[n];
        for (int k = 0; k < n; ++k) {
          g1[k] = th1 * oracle_gain(t1, axis[2][k] * P_avg / th1);
          g2[k] = th2 * oracle_gain(t2, axis[3][k] * P_avg / th2);
        }
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            if (axis[2][i] + axis[3][j] > 1.0 + 1e-12) continue;
            const double v = g1[i] + g2[j];
            if (v > best) {
              best = v;
              arg[0] = t1, arg[1] = t2, arg[2] = axis[2][i], arg[3] = axis[3][j];
            }
          }
        }
      }
    }
    for (int d = 0; d < 4; ++d) {
      const double w = (hi[d] - lo[d]) * 0.15;
      lo[d] = std::max(0.0, arg[d] - w);
      hi[d] = arg[d] + w;
      if (d >= 2) hi[d] = std::min(1.0, hi[d]);
    }
  }
  return best;
}

RunConfig sweep_config(Scenario scenario, std::vector<int> bits, std::vector<int> receivers,
                       std::vector<double> snr) {
  RunConfig cfg;
  cfg.scenario = scenario;
  cfg.bits = std::move(bits);
  cfg.receivers = std::move(receivers);
  cfg.snr_db = std::move(snr);
  return cfg;
}

Outcome criterion_common_ordering() {
  fig_common_rows = run_sweep(sweep_config(Scenario::Common, {1, 2, 4, 6}, {3}, kSnrGrid));
  const auto lower = curve(fig_common_rows, BoundKind::CommonLower);
  const auto perfect = curve(fig_common_rows, BoundKind::CommonPerfectCsi);
  double worst = INFINITY;
  for (double snr : kSnrGrid) {
    const std::vector<double> chain{lower.at({3, 1, snr}), lower.at({3, 2, snr}),
                                    lower.at({3, 4, snr}), lower.at({3, 6, snr}),
                                    perfect.at({3, 0, snr})};
    for (std::size_t i = 1; i < chain.size(); ++i) worst = std::min(worst, chain[i] - chain[i - 1]);
  }
  return {worst >= -1e-6, fmt("min successive difference %.3g over 8 SNRs", worst)};
}

Outcome criterion_asymptotic() {
  asymptotic_rows = run_sweep(sweep_config(Scenario::Common, {2, 4, 6, 8}, {1}, {10.0}));
  const double lo = curve(asymptotic_rows, BoundKind::CommonLower).at({1, 8, 10.0});
  const double up = curve(asymptotic_rows, BoundKind::CommonUpper).at({1, 8, 10.0});
  const double pc = curve(asymptotic_rows, BoundKind::CommonPerfectCsi).at({1, 0, 10.0});
  const double gap = (up - lo) / up;
  const double dev = std::abs(lo - pc) / pc;
  return {gap <= 0.05 && dev <= 0.05,
          fmt("lower %.6f upper %.6f perfect %.6f, relative gap %.4f, lower vs perfect %.4f", lo,
              up, pc, gap, dev)};
}

Outcome criterion_sum_ordering() {
  fig_sum_rows = run_sweep(sweep_config(Scenario::Sum, {4}, {3, 6}, kSnrGrid));
  const auto lower = curve(fig_sum_rows, BoundKind::SumLower);
  const auto perfect = curve(fig_sum_rows, BoundKind::SumPerfectCsi);
  double growth = INFINITY, headroom = INFINITY;
  for (double snr : kSnrGrid) {
    growth = std::min(growth, lower.at({6, 4, snr}) - lower.at({3, 4, snr}));
    for (int K : {3, 6}) headroom = std::min(headroom, perfect.at({K, 0, snr}) - lower.at({K, 4, snr}));
  }
  return {growth >= -1e-6 && headroom >= -1e-6,
          fmt("min(K=6 - K=3) %.3g, min(perfect - lower) %.3g", growth, headroom)};
}

Outcome criterion_sandwich(const std::vector<SweepRow>& bottleneck_rows) {
  int points = 0;
  double worst = INFINITY;
  const std::vector<const std::vector<SweepRow>*> all{&fig_common_rows, &fig_sum_rows,
                                                      &asymptotic_rows, &bottleneck_rows};
  for (const auto* rows : all) {
    for (auto [lk, uk] : {std::pair{BoundKind::CommonLower, BoundKind::CommonUpper},
                          std::pair{BoundKind::SumLower, BoundKind::SumUpper}}) {
      const auto lower = curve(*rows, lk);
      const auto upper = curve(*rows, uk);
      for (const auto& [key, v] : lower) {
        const auto it = upper.find(key);
        if (it == upper.end()) continue;
        worst = std::min(worst, it->second - v);
        ++points;
      }
    }
  }
  return {points > 0 && worst >= -1e-6,
          fmt("%d operating points, min(upper - lower) %.3g", points, worst)};
}

Outcome criterion_quadrature_oracle() {
  const double got = expected_secrecy_gain(1.0, 1.0, kUnit);
  const double want =
      std::log(2.0) - std::exp(1.0) * (boost::math::expint(1, 1.0) - boost::math::expint(1, 2.0));
  const double err = std::abs(got - want);
  return {err <= 1e-8, fmt("got %.15f want %.15f, error %.2g", got, want, err)};
}

Outcome criterion_brute_force() {
  Outcome out;
  for (double snr : {0.0, 10.0, 20.0}) {
    const double P_avg = snr_to_power(snr);
    const auto opt =
        optimize_thresholds_and_powers(kUnit, kUnit, 1, P_avg, BoundMode::LowerBound);
    const double grid = brute_force_one_bit(P_avg);
    const double diff = opt.value - grid;
    if (std::abs(diff) > 2e-3) out.pass = false;
    out.detail += fmt("%sSNR %g: optimizer %.6f grid %.6f", out.detail.empty() ? "" : "; ", snr,
                      opt.value, grid);
  }
  return out;
}

Outcome criterion_simulation() {
  const double P_avg = snr_to_power(10.0);
  const int K = 3, b = 4;
  const std::vector<FadingDistribution> mains(K, kUnit);
  Outcome out;
  auto check = [&](const char* label, const BoundResult& bound, Selection rule) {
    const auto& policy = std::get<PowerPolicy>(bound.policy);
    const double analytic = scheme_secrecy_rate(*bound.quantizer, policy, mains, kUnit, rule);
    const SimConfig cfg{.blocks = 1'000'000,
                        .seed = 1,
                        .mains = mains,
                        .eve = kUnit,
                        .quantizer = *bound.quantizer,
                        .policy = policy,
                        .workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency())),
                        .keep_trace = false};
    const auto r = simulate(cfg, rule);
    const double z = (r.rate_estimate - analytic) / r.std_error;
    const bool power_ok = r.mean_power <= P_avg + 3.0 * r.power_std_error;
    if (std::abs(z) > 3.0 || !power_ok) out.pass = false;
    out.detail += fmt("%s%s: sim %.5f analytic %.5f (z %.2f), bound %.5f, power %.3f",
                      out.detail.empty() ? "" : "; ", label, r.rate_estimate, analytic, z,
                      bound.value, r.mean_power);
  };
  check("common", common_message_lower(mains, kUnit, b, P_avg), Selection::Min);
  check("sum", sum_rate_lower(kUnit, K, kUnit, b, P_avg), Selection::Max);
  return out;
}

Outcome criterion_kkt() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> snr_dist(-5.0, 30.0), mean_dist(0.25, 4.0);
  std::uniform_int_distribution<int> bits_dist(1, 4), mode_dist(0, 1);
  int passed = 0;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double P_avg = snr_to_power(snr_dist(rng));
    const auto main = FadingDistribution::exponential(mean_dist(rng));
    const auto eve = FadingDistribution::exponential(mean_dist(rng));
    const int b = bits_dist(rng);
    const auto mode = mode_dist(rng) == 0 ? BoundMode::LowerBound : BoundMode::UpperBound;
    const auto r = optimize_thresholds_and_powers(main, eve, b, P_avg, mode);
    const auto theta = cell_probabilities(r.quantizer, main);
    const auto kkt = check_kkt(r.quantizer, theta, r.policy, r.multiplier, mode, main, eve);
    const bool budget = r.policy.average_power(theta) <= P_avg * (1.0 + 1e-9);
    if (kkt.satisfied && budget) ++passed;
    worst = std::max(worst, kkt.worst_violation / std::max(r.multiplier, 1e-300));
  }
  return {passed == 20, fmt("%d/20 policies certified, worst relative violation %.2g", passed, worst)};
}

Outcome criterion_bottleneck(std::vector<SweepRow>& rows) {
  RunConfig cfg = sweep_config(Scenario::Common, {2}, {3}, {10.0});
  cfg.main_means = {1.0, 1.0, 0.25};
  cfg.perfect = false;
  rows = run_sweep(cfg);
  const double three = curve(rows, BoundKind::CommonLower).at({3, 2, 10.0});
  const auto weakest = FadingDistribution::exponential(0.25);
  const double single = common_message_lower({weakest}, kUnit, 2, snr_to_power(10.0)).value;
  const double diff = std::abs(three - single);
  return {diff <= 1e-6, fmt("K=3 %.9f, weakest alone %.9f, difference %.2g", three, single, diff)};
}

Outcome criterion_determinism() {
  auto csv = [](int workers, Scenario scenario) {
    RunConfig cfg = sweep_config(scenario, {1, 2}, {1, 3}, {0.0, 20.0});
    cfg.workers = workers;
    std::ostringstream os;
    write_sweep_csv(os, run_sweep(cfg));
    return os.str();
  };
  bool same = true;
  std::size_t bytes = 0;
  for (Scenario s : {Scenario::Common, Scenario::Sum}) {
    const auto a = csv(1, s), b = csv(1, s), c = csv(4, s);
    same = same && a == b && a == c;
    bytes += a.size();
  }
  return {same, fmt("%zu bytes, serial twice and 4 workers %s", bytes,
                    same ? "identical" : "differ")};
}

}  // namespace

int main() {
  std::vector<SweepRow> bottleneck_rows;
  report(1, "common-message lower bound grows with b, K=3", criterion_common_ordering);
  report(2, "bounds coincide at b=8", criterion_asymptotic);
  report(3, "sum rate grows with K at b=4", criterion_sum_ordering);
  report(5, "quadrature vs exponential-integral closed form", criterion_quadrature_oracle);
  report(6, "one-bit optimizer vs 50^4 grid", criterion_brute_force);
  report(7, "simulation vs analysis, K=3, b=4, 10 dB", criterion_simulation);
  report(8, "KKT certificates at 20 random points", criterion_kkt);
  report(9, "weakest receiver is the bottleneck",
         [&] { return criterion_bottleneck(bottleneck_rows); });
  report(4, "lower <= upper at every evaluated point",
         [&] { return criterion_sandwich(bottleneck_rows); });
  report(10, "sweep CSV is byte-stable", criterion_determinism);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
