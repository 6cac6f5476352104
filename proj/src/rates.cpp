#include "wiretap/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wiretap/error.hpp"

namespace wiretap {

double pos_log_ratio(double gm, double ge, double P) {
  if (!(gm >= 0.0) || !(ge >= 0.0) || !(P >= 0.0)) {
    throw DomainError("gains and power must be non-negative");
  }
  if (ge >= gm || P == 0.0) return 0.0;
  return std::max(0.0, std::log1p(gm * P) - std::log1p(ge * P));
}

std::array<double, 3> density_breaks(const FadingDistribution& dist, double a, double b) {
  const auto& m = dist.landmarks();
  if (m[2] - m[0] < (b - a) / 16.0) return m;
  constexpr double none = std::numeric_limits<double>::quiet_NaN();
  return {none, none, none};
}

double expected_secrecy_gain(double tau, double P, const FadingDistribution& eve,
                             const QuadratureSettings& qs) {
  if (!(tau >= 0.0) || !(P >= 0.0)) {
    throw DomainError("threshold and power must be non-negative");
  }
  if (tau == 0.0 || P == 0.0) return 0.0;
  const double rate = std::log1p(tau * P);
  const auto m = density_breaks(eve, 0.0, tau);
  const auto breaks = break_points(0.0, tau, {1.0 / P, m[0], m[1], m[2]});
  const auto res = integrate(
      [&](double x) { return (rate - std::log1p(x * P)) * eve.pdf(x); },
      std::span<const double>(breaks), qs);
  return std::clamp(res.value, 0.0, rate);
}

double tail_cutoff(double lo, const FadingDistribution& dist,
                   const QuadratureSettings& qs) {
  const double bulk = dist.quantile(qs.tail_quantile);
  const double s_lo = dist.survival(lo);
  if (s_lo <= 0.0) return lo;
  // Cells that start deep in the tail keep the same relative truncation.
  return std::max(bulk, dist.inverse_survival((1.0 - qs.tail_quantile) * s_lo));
}

double cell_secrecy_mass(double lo, double hi, double P,
                         const FadingDistribution& main,
                         const FadingDistribution& eve,
                         const QuadratureSettings& qs) {
  if (!(lo >= 0.0) || !(hi > lo) || !(P >= 0.0)) {
    throw DomainError("cell needs 0 <= lo < hi and non-negative power");
  }
  if (P == 0.0) return 0.0;
  const double top = std::isinf(hi) ? tail_cutoff(lo, main, qs) : hi;
  if (!(top > lo)) return 0.0;
  const double s_top = main.survival(top);

  const auto mm = density_breaks(main, lo, top);
  const auto me = density_breaks(eve, lo, top);
  const auto outer_breaks =
      break_points(lo, top, {1.0 / P, mm[0], mm[1], mm[2], me[0], me[1], me[2]});
  const double first =
      integrate(
          [&](double g) { return main.pdf(g) * eve.cdf(g) * std::log1p(g * P); },
          std::span<const double>(outer_breaks), qs)
          .value;

  const double cell_mass = main.survival(lo) - s_top;
  const auto ie = density_breaks(eve, 0.0, top);
  const auto inner_breaks =
      break_points(0.0, top, {lo, 1.0 / P, mm[0], mm[1], mm[2], ie[0], ie[1], ie[2]});
  const double second =
      integrate(
          [&](double x) {
            const double occupied =
                x <= lo ? cell_mass : main.survival(x) - s_top;
            return std::log1p(x * P) * eve.pdf(x) * occupied;
          },
          std::span<const double>(inner_breaks), qs)
          .value;
  return std::max(0.0, first - second);
}

namespace {

double cell_probability(double lo, double hi, const FadingDistribution& main) {
  return main.survival(lo) - (std::isinf(hi) ? 0.0 : main.survival(hi));
}

}  // namespace

double conditional_upper_gain(double lo, double hi, double P,
                              const FadingDistribution& main,
                              const FadingDistribution& eve,
                              const QuadratureSettings& qs) {
  if (!(lo >= 0.0) || !(hi > lo)) throw DomainError("cell needs 0 <= lo < hi");
  const double theta = cell_probability(lo, hi, main);
  if (!(theta > 0.0)) throw DomainError("cell has zero probability");
  return cell_secrecy_mass(lo, hi, P, main, eve, qs) / theta;
}

double conditional_upper_gain_nested(double lo, double hi, double P,
                                     const FadingDistribution& main,
                                     const FadingDistribution& eve,
                                     const QuadratureSettings& qs) {
  if (!(lo >= 0.0) || !(hi > lo)) throw DomainError("cell needs 0 <= lo < hi");
  const double theta = cell_probability(lo, hi, main);
  if (!(theta > 0.0)) throw DomainError("cell has zero probability");
  if (P == 0.0) return 0.0;
  const double top = std::isinf(hi) ? tail_cutoff(lo, main, qs) : hi;
  const auto mm = density_breaks(main, lo, top);
  const auto breaks = break_points(lo, top, {1.0 / P, mm[0], mm[1], mm[2]});
  const double mass =
      integrate(
          [&](double g) {
            return main.pdf(g) * expected_secrecy_gain(g, P, eve, qs);
          },
          std::span<const double>(breaks), qs)
          .value;
  return mass / theta;
}

}  // namespace wiretap
