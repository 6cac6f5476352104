#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <queue>
#include <span>
#include <vector>

#include "wiretap/error.hpp"

namespace wiretap {

/// Tolerances shared by every integral in the library.
struct QuadratureSettings {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  /// Improper integrals over a gain stop at quantile(tail_quantile).
  double tail_quantile = 1.0 - 1e-10;
  int max_subdivisions = 1 << 16;

  /// Throws DomainError when a field is out of range.
  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int subdivisions = 0;
};

namespace detail {

// 15-point Kronrod abscissae and weights with the embedded 7-point Gauss rule.
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <class F>
Segment kronrod15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * pair;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration over [breaks.front(),
/// breaks.back()], with the interior break points taken as initial interval
/// boundaries. Kinks and steep layers of the integrand belong there.
///
/// Bisects the segment with the largest error estimate until the total
/// estimate meets max(abs_tol, rel_tol * |value|). Throws NumericError with
/// the residual estimate if the subdivision budget runs out first.
template <class F>
QuadratureResult integrate(F&& f, std::span<const double> breaks,
                           const QuadratureSettings& qs) {
  QuadratureResult out;
  if (breaks.size() < 2) return out;
  std::priority_queue<detail::Segment> heap;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    const auto seg = detail::kronrod15(f, breaks[i], breaks[i + 1]);
    out.value += seg.value;
    out.error += seg.error;
    heap.push(seg);
  }
  while (out.error > std::max(qs.abs_tol, qs.rel_tol * std::abs(out.value))) {
    if (out.subdivisions >= qs.max_subdivisions) {
      throw NumericError("adaptive quadrature did not converge", out.error);
    }
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw NumericError("adaptive quadrature hit floating-point resolution",
                         out.error);
    }
    const auto left = detail::kronrod15(f, worst.a, mid);
    const auto right = detail::kronrod15(f, mid, worst.b);
    out.value += left.value + right.value - worst.value;
    out.error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++out.subdivisions;
  }
  return out;
}

template <class F>
QuadratureResult integrate(F&& f, double a, double b,
                           const QuadratureSettings& qs) {
  const std::array<double, 2> breaks{a, b};
  return integrate(std::forward<F>(f), std::span<const double>(breaks), qs);
}

/// Sorted break points in [a, b] built from candidate interior points;
/// candidates outside the open interval are dropped.
std::vector<double> break_points(double a, double b,
                                 std::initializer_list<double> interior);

}  // namespace wiretap
