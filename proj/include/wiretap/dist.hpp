#pragma once

#include <array>
#include <string>

#include "wiretap/random.hpp"

namespace wiretap {

enum class Family { Exponential, Gamma };

/// Law of a squared channel gain on [0, inf).
///
/// The base family is either exponential (Rayleigh fading power) or gamma
/// with integer shape (sum of i.i.d. exponential powers). A distribution can
/// also describe the maximum of `order()` i.i.d. draws from its base family;
/// that view is what the strongest-receiver bounds integrate against.
class FadingDistribution {
 public:
  static FadingDistribution exponential(double mean);
  static FadingDistribution gamma(int shape, double scale);

  Family family() const { return family_; }
  int shape() const { return shape_; }
  double scale() const { return scale_; }
  /// Number of i.i.d. base draws whose maximum this law describes.
  int order() const { return order_; }

  double cdf(double x) const;
  /// 1 - cdf(x), computed without cancellation in the upper tail.
  double survival(double x) const;
  double pdf(double x) const;
  /// Smallest x with cdf(x) >= p, for p in [0, 1).
  double quantile(double p) const;
  /// Largest x with survival(x) >= s, for s in (0, 1]; accurate deep in the
  /// upper tail where quantile(1 - s) would round.
  double inverse_survival(double s) const;
  double mean() const;
  /// Quantiles at 1e-3, 0.5 and 0.999; quadrature break points that keep
  /// narrow densities from slipping between nodes.
  const std::array<double, 3>& landmarks() const { return landmarks_; }

  double sample(RandomStream& stream) const;

  std::string describe() const;

  friend bool operator==(const FadingDistribution&,
                         const FadingDistribution&) = default;

 private:
  friend FadingDistribution max_order_statistic(const FadingDistribution&, int);

  FadingDistribution(Family family, int shape, double scale, int order)
      : family_(family), shape_(shape), scale_(scale), order_(order) {
    set_landmarks();
  }

  void set_landmarks();

  double base_cdf(double x) const;
  double base_survival(double x) const;
  double base_pdf(double x) const;
  double base_quantile_from_survival(double s) const;
  double base_quantile_from_cdf(double c) const;
  double base_sample(RandomStream& stream) const;

  Family family_;
  int shape_;
  double scale_;
  int order_;
  double log_gamma_shape_ = 0.0;
  std::array<double, 3> landmarks_{};
};

/// Law of max(X_1, ..., X_K) for K i.i.d. copies of `dist`.
FadingDistribution max_order_statistic(const FadingDistribution& dist, int K);

/// Squared norm of the channel vector of M colluding eavesdroppers with
/// i.i.d. exponential gains.
FadingDistribution colluding_eavesdropper(const FadingDistribution& dist, int M);

}  // namespace wiretap
