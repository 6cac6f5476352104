#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wiretap/dist.hpp"

namespace wiretap {

/// Reconstruction points 0 < tau_1 < ... < tau_Q with Q = 2^b.
///
/// The points split [0, inf) into Q + 1 left-closed cells; cell q is
/// [tau_q, tau_{q+1}) with tau_0 = 0 and tau_{Q+1} = inf. Cell 0 lies below
/// the first reconstruction point.
class Quantizer {
 public:
  explicit Quantizer(std::vector<double> thresholds);

  int bits() const { return bits_; }
  std::size_t levels() const { return thresholds_.size(); }
  std::size_t cells() const { return thresholds_.size() + 1; }
  std::span<const double> thresholds() const { return thresholds_; }

  /// Lower edge of cell q (0 for q = 0).
  double lower(std::size_t q) const { return q == 0 ? 0.0 : thresholds_[q - 1]; }
  /// Upper edge of cell q (inf for q = Q).
  double upper(std::size_t q) const;

  /// Cell holding gain `gamma`.
  std::size_t index_of(double gamma) const;

  friend bool operator==(const Quantizer&, const Quantizer&) = default;

 private:
  std::vector<double> thresholds_;
  int bits_;
};

/// Pr[tau_q <= gamma < tau_{q+1}] for every cell q = 0..Q.
std::vector<double> cell_probabilities(const Quantizer& quant,
                                       const FadingDistribution& dist);

/// tau_q = dist.quantile(q / (Q + 1)); every one of the Q + 1 cells gets
/// probability 1 / (Q + 1).
Quantizer equiprobable_quantizer(const FadingDistribution& dist, int bits);

}  // namespace wiretap
