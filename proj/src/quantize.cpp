#include "wiretap/quantize.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "wiretap/error.hpp"

namespace wiretap {

Quantizer::Quantizer(std::vector<double> thresholds)
    : thresholds_(std::move(thresholds)) {
  const std::size_t Q = thresholds_.size();
  if (Q == 0 || !std::has_single_bit(Q)) {
    throw DomainError("quantizer needs Q = 2^b reconstruction points");
  }
  bits_ = std::countr_zero(Q);
  double prev = 0.0;
  for (double t : thresholds_) {
    if (!std::isfinite(t) || !(t > prev)) {
      throw DomainError("reconstruction points must be finite and strictly increasing from 0");
    }
    prev = t;
  }
}

double Quantizer::upper(std::size_t q) const {
  return q < thresholds_.size() ? thresholds_[q]
                                : std::numeric_limits<double>::infinity();
}

std::size_t Quantizer::index_of(double gamma) const {
  // Number of points <= gamma; cells are left-closed.
  return static_cast<std::size_t>(
      std::upper_bound(thresholds_.begin(), thresholds_.end(), gamma) -
      thresholds_.begin());
}

std::vector<double> cell_probabilities(const Quantizer& quant,
                                       const FadingDistribution& dist) {
  const std::size_t n = quant.cells();
  std::vector<double> probs(n);
  double prev_cdf = 0.0;
  for (std::size_t q = 0; q + 1 < n; ++q) {
    const double c = dist.cdf(quant.upper(q));
    probs[q] = c - prev_cdf;
    prev_cdf = c;
  }
  probs[n - 1] = dist.survival(quant.lower(n - 1));
  return probs;
}

Quantizer equiprobable_quantizer(const FadingDistribution& dist, int bits) {
  if (bits < 0 || bits > 20) throw DomainError("feedback bits must lie in 0..20");
  const std::size_t Q = std::size_t{1} << bits;
  std::vector<double> t(Q);
  for (std::size_t q = 1; q <= Q; ++q) {
    t[q - 1] = dist.quantile(static_cast<double>(q) / static_cast<double>(Q + 1));
  }
  return Quantizer(std::move(t));
}

}  // namespace wiretap
