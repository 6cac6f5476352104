#include <algorithm>
#include <boost/math/special_functions/expint.hpp>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "wiretap/bounds.hpp"
#include "wiretap/error.hpp"
#include "wiretap/random.hpp"
#include "wiretap/rates.hpp"

using namespace wiretap;

namespace {

double scaled_e1(double y) {
  if (y < 50.0) return std::exp(y) * boost::math::expint(1, y);
  const double r = 1.0 / y;
  return r * (1.0 - r + 2.0 * r * r - 6.0 * r * r * r + 24.0 * r * r * r * r);
}

// Lower-bound cell gain for an Exp(1) eavesdropper in closed form.
double oracle_gain(double tau, double P) {
  if (P <= 0.0 || tau <= 0.0) return 0.0;
  const double x = 1.0 / P;
  return std::log1p(tau * P) - (scaled_e1(x) - std::exp(-tau) * scaled_e1(x + tau));
}

BoundSettings quick() {
  BoundSettings s;
  s.optimizer.perturbed_starts = 1;
  return s;
}

const FadingDistribution kUnit = FadingDistribution::exponential(1.0);

}  // namespace

TEST_CASE("single receiver common bound is the single-user optimum") {
  const auto settings = quick();
  const auto r = common_message_lower({kUnit}, kUnit, 2, 10.0, settings);
  const auto direct = optimize_thresholds_and_powers(kUnit, kUnit, 2, 10.0,
                                                     BoundMode::LowerBound, settings.optimizer);
  CHECK(r.value == direct.value);
  CHECK(r.kind == BoundKind::CommonLower);
  CHECK(r.bottleneck_receiver == std::size_t{0});
  CHECK(*r.quantizer == direct.quantizer);
  REQUIRE(r.bits.has_value());
  CHECK(*r.bits == 2);
}

TEST_CASE("identical receivers share one optimum") {
  const auto settings = quick();
  const auto one = common_message_lower({kUnit}, kUnit, 1, 10.0, settings);
  const auto three = common_message_lower({kUnit, kUnit, kUnit}, kUnit, 1, 10.0, settings);
  REQUIRE(three.receivers.size() == 3);
  for (const auto& r : three.receivers) CHECK(std::abs(r.value - three.value) <= 1e-6);
  CHECK(three.value == one.value);
  CHECK(three.bottleneck_receiver == std::size_t{0});
}

TEST_CASE("common message is limited by the weakest receiver") {
  const auto settings = quick();
  const auto weak = FadingDistribution::exponential(0.25);
  const auto pair = common_message_lower({kUnit, weak}, kUnit, 2, 10.0, settings);
  const auto alone = common_message_lower({weak}, kUnit, 2, 10.0, settings);
  CHECK(std::abs(pair.value - alone.value) <= 1e-6);
  CHECK(pair.bottleneck_receiver == std::size_t{1});
  CHECK(pair.receivers[0].value > pair.receivers[1].value);
}

TEST_CASE("upper bound sits above the lower bound") {
  const auto settings = quick();
  const auto tiny_eve = FadingDistribution::gamma(50, 1e-4);
  for (const auto& eve : {kUnit, tiny_eve}) {
    for (int b : {1, 2}) {
      if (b > 1 && !(eve == kUnit)) continue;
      const auto lo = common_message_lower({kUnit}, eve, b, 10.0, settings);
      const auto up = common_message_upper({kUnit}, eve, b, 10.0, settings);
      CHECK(lo.value <= up.value + 1e-6);
      CHECK(up.kind == BoundKind::CommonUpper);
      const auto slo = sum_rate_lower(kUnit, 3, eve, b, 10.0, settings);
      const auto sup = sum_rate_upper(kUnit, 3, eve, b, 10.0, settings);
      CHECK(slo.value <= sup.value + 1e-6);
    }
  }
}

TEST_CASE("upper bound agrees with a Monte Carlo of the conditional expectation") {
  const double P_avg = 10.0;
  const auto up = common_message_upper({kUnit}, kUnit, 2, P_avg, quick());
  const Quantizer& quant = *up.quantizer;
  const auto& powers = std::get<PowerPolicy>(up.policy).powers;
  const int N = 10'000'000;
  double sum = 0.0, sum_sq = 0.0;
  RandomStream main_rng(7, 0, 0), eve_rng(7, 0, 1);
  for (int i = 0; i < N; ++i) {
    const double gm = kUnit.sample(main_rng);
    const double ge = kUnit.sample(eve_rng);
    const double P = powers[quant.index_of(gm)];
    const double v = pos_log_ratio(gm, ge, P);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / N;
  const double se = std::sqrt((sum_sq / N - mean * mean) / N);
  CHECK(std::abs(mean - up.value) <= 3.0 * se);
}

TEST_CASE("sum rate with one receiver equals the common-message bound") {
  const auto settings = quick();
  const auto c = common_message_lower({kUnit}, kUnit, 2, 10.0, settings);
  const auto s = sum_rate_lower(kUnit, 1, kUnit, 2, 10.0, settings);
  CHECK(c.value == s.value);
  CHECK(perfect_csi_common({kUnit}, kUnit, 10.0).value ==
        perfect_csi_sum(kUnit, 1, kUnit, 10.0).value);
}

TEST_CASE("sum rate grows with the number of receivers") {
  const auto settings = quick();
  double previous = 0.0;
  for (int K : {1, 2, 3, 6}) {
    const auto s = sum_rate_lower(kUnit, K, kUnit, 2, 10.0, settings);
    CHECK(s.value >= previous - 1e-6);
    previous = s.value;
  }
}

TEST_CASE("two-receiver one-bit sum rate matches a brute-force grid") {
  const double P_avg = 10.0;
  const auto s = sum_rate_lower(kUnit, 2, kUnit, 1, P_avg, quick());
  // gamma_max of two Exp(1) draws: S(t) = 1 - (1 - e^{-t})^2.
  auto surv = [](double t) { return 1.0 - std::pow(-std::expm1(-t), 2); };
  double c1 = 1.5, c2 = 3.0, c3 = 0.5, w1 = 1.5, w2 = 3.0, w3 = 0.5;
  double best = 0.0;
  const int n = 40;
  for (int zoom = 0; zoom < 4; ++zoom) {
    double b1 = c1, b2 = c2, b3 = c3;
    for (int i = 0; i < n; ++i) {
      const double t1 = c1 - w1 + 2.0 * w1 * i / (n - 1);
      if (t1 <= 0.0) continue;
      for (int j = 0; j < n; ++j) {
        const double t2 = c2 - w2 + 2.0 * w2 * j / (n - 1);
        if (t2 <= t1) continue;
        const double th1 = surv(t1) - surv(t2), th2 = surv(t2);
        for (int k = 0; k < n; ++k) {
          const double frac = c3 - w3 + 2.0 * w3 * k / (n - 1);
          if (frac < 0.0 || frac > 1.0) continue;
          const double v = th1 * oracle_gain(t1, frac * P_avg / th1) +
                           th2 * oracle_gain(t2, (1.0 - frac) * P_avg / th2);
          if (v > best) best = v, b1 = t1, b2 = t2, b3 = frac;
        }
      }
    }
    c1 = b1, c2 = b2, c3 = b3;
    w1 *= 0.2, w2 *= 0.2, w3 *= 0.2;
  }
  CHECK(std::abs(s.value - best) < 2e-3);
}

TEST_CASE("heterogeneous receivers are rejected for the sum rate") {
  const std::vector<FadingDistribution> mixed{kUnit, FadingDistribution::exponential(2.0)};
  CHECK_THROWS_AS(sum_rate_lower(mixed, kUnit, 1, 1.0), UnsupportedError);
  CHECK_THROWS_AS(sum_rate_upper(mixed, kUnit, 1, 1.0), UnsupportedError);
  const std::vector<FadingDistribution> same{kUnit, kUnit};
  CHECK(sum_rate_lower(same, kUnit, 1, 1.0, quick()).value ==
        sum_rate_lower(kUnit, 2, kUnit, 1, 1.0, quick()).value);
  CHECK_THROWS_AS(common_message_lower({}, kUnit, 1, 1.0), DomainError);
  CHECK_THROWS_AS(common_message_lower({kUnit}, kUnit, 1, -1.0), DomainError);
}

TEST_CASE("feedback bits climb towards the perfect-CSI value") {
  const double P_avg = 10.0;
  BoundSettings settings = quick();
  const auto perfect = perfect_csi_common({kUnit}, kUnit, P_avg, settings);
  std::optional<BoundResult> previous;
  for (int b = 1; b <= 6; ++b) {
    const auto r = common_message_lower({kUnit}, kUnit, b, P_avg, settings,
                                        previous ? &*previous : nullptr);
    if (previous) CHECK(r.value >= previous->value - 1e-6);
    CHECK(r.value <= perfect.value + 1e-6);
    previous = r;
  }
  CHECK(previous->value >= 0.95 * perfect.value);
}

TEST_CASE("perfect-CSI value against a discretised brute-force allocation") {
  const double P_avg = 10.0;
  const auto perfect = perfect_csi_common({kUnit}, kUnit, P_avg);
  // Equiprobable gain cells at their conditional medians, powers on a fixed
  // ladder, multiplier bisected on the ladder allocation.
  const int cells = 400;
  std::vector<double> gains(cells);
  for (int i = 0; i < cells; ++i) gains[i] = -std::log1p(-(i + 0.5) / cells);
  std::vector<double> ladder;
  for (int j = 0; j <= 3000; ++j) ladder.push_back(j * 0.02 * P_avg);
  std::vector<std::vector<double>> table(cells, std::vector<double>(ladder.size()));
  for (int i = 0; i < cells; ++i)
    for (std::size_t j = 0; j < ladder.size(); ++j) table[i][j] = oracle_gain(gains[i], ladder[j]);
  auto allocate = [&](double lambda, double& value) {
    double power = 0.0;
    value = 0.0;
    for (int i = 0; i < cells; ++i) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < ladder.size(); ++j)
        if (table[i][j] - lambda * ladder[j] > table[i][best] - lambda * ladder[best]) best = j;
      power += ladder[best] / cells;
      value += table[i][best] / cells;
    }
    return power;
  };
  double lo = 1e-6, hi = 10.0, value = 0.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = std::sqrt(lo * hi);
    (allocate(mid, value) > P_avg ? lo : hi) = mid;
  }
  allocate(hi, value);
  CHECK(std::abs(perfect.value - value) < 1e-2);
  CHECK(perfect.kind == BoundKind::CommonPerfectCsi);
  CHECK_FALSE(perfect.bits.has_value());
  CHECK_FALSE(perfect.quantizer.has_value());
}

TEST_CASE("perfect-CSI value vanishes with the budget") {
  double previous = 1.0;
  for (double P_avg : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const auto r = perfect_csi_common({kUnit}, kUnit, P_avg);
    CHECK(r.value >= 0.0);
    CHECK(r.value < previous);
    // Flash signalling: the rate decays like P_avg ln(1 / P_avg).
    CHECK(r.value <= P_avg * std::log(1.0 / P_avg));
    previous = r.value;
  }
}

TEST_CASE("common-message value never exceeds the sum rate") {
  const auto settings = quick();
  const auto c = common_message_lower({kUnit, kUnit, kUnit}, kUnit, 2, 10.0, settings);
  const auto s = sum_rate_lower(kUnit, 3, kUnit, 2, 10.0, settings);
  CHECK(c.value <= s.value + 1e-6);
  const auto pc = perfect_csi_common({kUnit, kUnit, kUnit}, kUnit, 10.0);
  const auto ps = perfect_csi_sum(kUnit, 3, kUnit, 10.0);
  CHECK(pc.value <= ps.value + 1e-6);
}

TEST_CASE("bound values respect the crude capacity cap") {
  const auto settings = quick();
  for (double P_avg : {0.3, 10.0, 1000.0}) {
    const auto r = common_message_lower({kUnit}, kUnit, 2, P_avg, settings);
    const auto& powers = std::get<PowerPolicy>(r.policy).powers;
    const double p_max = *std::max_element(powers.begin(), powers.end());
    const double cap = std::log1p(kUnit.quantile(1.0 - 1e-10) * p_max);
    CHECK(std::isfinite(r.value));
    CHECK(r.value >= 0.0);
    CHECK(r.value <= cap);
  }
}

TEST_CASE("selection probabilities") {
  const Quantizer quant({std::log(1.5), std::log(3.0)});
  const auto single = selection_probabilities(quant, {kUnit}, Selection::Min);
  const auto theta = cell_probabilities(quant, kUnit);
  for (std::size_t q = 0; q < 3; ++q) CHECK(single[q] == doctest::Approx(theta[q]).epsilon(1e-14));
  const auto single_max = selection_probabilities(quant, {kUnit}, Selection::Max);
  for (std::size_t q = 0; q < 3; ++q) CHECK(single_max[q] == doctest::Approx(single[q]).epsilon(1e-14));

  // Two receivers: Pr[min index >= q] = S(tau_q)^2, Pr[max index <= q] = F(tau_{q+1})^2.
  const auto mn = selection_probabilities(quant, {kUnit, kUnit}, Selection::Min);
  CHECK(mn[0] == doctest::Approx(1.0 - 4.0 / 9.0));
  CHECK(mn[1] == doctest::Approx(4.0 / 9.0 - 1.0 / 9.0));
  CHECK(mn[2] == doctest::Approx(1.0 / 9.0));
  const auto mx = selection_probabilities(quant, {kUnit, kUnit}, Selection::Max);
  CHECK(mx[0] == doctest::Approx(1.0 / 9.0));
  CHECK(mx[1] == doctest::Approx(4.0 / 9.0 - 1.0 / 9.0));
  CHECK(mx[2] == doctest::Approx(1.0 - 4.0 / 9.0));
  double total = 0.0;
  for (double p : mx) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));

  // Max over i.i.d. receivers equals the order-statistic cell split.
  const auto view = cell_probabilities(quant, max_order_statistic(kUnit, 3));
  const auto mx3 = selection_probabilities(quant, {kUnit, kUnit, kUnit}, Selection::Max);
  for (std::size_t q = 0; q < 3; ++q) CHECK(mx3[q] == doctest::Approx(view[q]).epsilon(1e-12));
}

TEST_CASE("scheme rate reproduces the single-receiver bound") {
  const auto r = common_message_lower({kUnit}, kUnit, 2, 10.0, quick());
  const auto& policy = std::get<PowerPolicy>(r.policy);
  CHECK(scheme_secrecy_rate(*r.quantizer, policy, {kUnit}, kUnit, Selection::Min) ==
        doctest::Approx(r.value).epsilon(1e-10));
  CHECK(scheme_average_power(*r.quantizer, policy, {kUnit}, Selection::Min) <=
        10.0 * (1.0 + 1e-9));
}

TEST_CASE("equiprobable threshold mode keeps the quantizer fixed") {
  BoundSettings eq = quick();
  eq.thresholds = ThresholdMode::Equiprobable;
  const auto fixed = common_message_lower({kUnit}, kUnit, 2, 10.0, eq);
  const auto opt = common_message_lower({kUnit}, kUnit, 2, 10.0, quick());
  CHECK(*fixed.quantizer == equiprobable_quantizer(kUnit, 2));
  CHECK(fixed.value <= opt.value + 1e-9);
}

TEST_CASE("bound results serialise to JSON") {
  const auto r = common_message_lower({kUnit, FadingDistribution::exponential(0.5)}, kUnit, 1,
                                      3.0, quick());
  const auto j = r.to_json();
  CHECK(j["kind"] == "common_lower");
  CHECK(j["value_npcu"].get<double>() == r.value);
  CHECK(j["bits"] == 1);
  CHECK(j["bottleneck_receiver"] == 1);
  CHECK(j["thresholds"].size() == 2);
  CHECK(j["policy"]["powers"].size() == 3);
  CHECK(j["receivers"].size() == 2);
  CHECK(j["diagnostics"].contains("rounds"));
  const auto p = perfect_csi_sum(kUnit, 2, kUnit, 3.0).to_json();
  CHECK(p["bits"].is_null());
  CHECK(p["thresholds"].is_null());
  CHECK(p["policy"]["grid"].size() == 512);
}
