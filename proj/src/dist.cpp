#include "wiretap/dist.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "wiretap/error.hpp"
#include "wiretap/quadrature.hpp"

namespace wiretap {

FadingDistribution FadingDistribution::exponential(double mean) {
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    throw DomainError("exponential mean must be positive and finite");
  }
  return FadingDistribution(Family::Exponential, 1, mean, 1);
}

FadingDistribution FadingDistribution::gamma(int shape, double scale) {
  if (shape < 1) throw DomainError("gamma shape must be a positive integer");
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DomainError("gamma scale must be positive and finite");
  }
  return FadingDistribution(Family::Gamma, shape, scale, 1);
}

void FadingDistribution::set_landmarks() {
  log_gamma_shape_ = std::lgamma(static_cast<double>(shape_));
  landmarks_ = {quantile(1e-3), quantile(0.5), quantile(0.999)};
}

double FadingDistribution::base_cdf(double x) const {
  if (family_ == Family::Exponential) return -std::expm1(-x / scale_);
  return boost::math::gamma_p(static_cast<double>(shape_), x / scale_);
}

double FadingDistribution::base_survival(double x) const {
  if (family_ == Family::Exponential) return std::exp(-x / scale_);
  return boost::math::gamma_q(static_cast<double>(shape_), x / scale_);
}

double FadingDistribution::base_pdf(double x) const {
  const double u = x / scale_;
  if (family_ == Family::Exponential || shape_ == 1) return std::exp(-u) / scale_;
  if (u == 0.0) return 0.0;
  // Erlang density u^{k-1} e^{-u} / (k-1)!.
  return std::exp((shape_ - 1) * std::log(u) - u - log_gamma_shape_) / scale_;
}

double FadingDistribution::base_quantile_from_survival(double s) const {
  if (s >= 1.0) return 0.0;
  if (family_ == Family::Exponential) return -scale_ * std::log(s);
  return scale_ * boost::math::gamma_q_inv(static_cast<double>(shape_), s);
}

double FadingDistribution::base_quantile_from_cdf(double c) const {
  if (c <= 0.0) return 0.0;
  if (family_ == Family::Exponential) return -scale_ * std::log1p(-c);
  return scale_ * boost::math::gamma_p_inv(static_cast<double>(shape_), c);
}

double FadingDistribution::cdf(double x) const {
  if (!(x >= 0.0)) throw DomainError("cdf argument must be non-negative");
  if (std::isinf(x)) return 1.0;
  const double base = base_cdf(x);
  return order_ == 1 ? base : std::pow(base, order_);
}

double FadingDistribution::survival(double x) const {
  if (!(x >= 0.0)) throw DomainError("survival argument must be non-negative");
  if (std::isinf(x)) return 0.0;
  if (order_ == 1) return base_survival(x);
  // 1 - (1 - s)^K = -expm1(K * log1p(-s))
  return -std::expm1(order_ * std::log1p(-base_survival(x)));
}

double FadingDistribution::pdf(double x) const {
  if (!(x >= 0.0)) throw DomainError("pdf argument must be non-negative");
  if (std::isinf(x)) return 0.0;
  const double f = base_pdf(x);
  if (order_ == 1) return f;
  return order_ * std::pow(base_cdf(x), order_ - 1) * f;
}

double FadingDistribution::quantile(double p) const {
  if (!(p >= 0.0) || !(p < 1.0)) {
    throw DomainError("quantile level must lie in [0, 1)");
  }
  if (p == 0.0) return 0.0;
  // Base cdf level c = p^(1/K); invert whichever tail keeps precision.
  const double c = order_ == 1 ? p : std::exp(std::log(p) / order_);
  if (c < 0.5) return base_quantile_from_cdf(c);
  const double s = order_ == 1 ? 1.0 - p : -std::expm1(std::log(p) / order_);
  return base_quantile_from_survival(s);
}

double FadingDistribution::inverse_survival(double s) const {
  if (!(s > 0.0) || !(s <= 1.0)) {
    throw DomainError("survival level must lie in (0, 1]");
  }
  if (s == 1.0) return 0.0;
  const double base = order_ == 1 ? s : -std::expm1(std::log1p(-s) / order_);
  return base_quantile_from_survival(base);
}

double FadingDistribution::mean() const {
  const double base_mean = shape_ * scale_;
  if (order_ == 1) return base_mean;
  if (family_ == Family::Exponential) {
    // E[max of K exponentials] = mean * H_K
    double harmonic = 0.0;
    for (int k = 1; k <= order_; ++k) harmonic += 1.0 / k;
    return scale_ * harmonic;
  }
  QuadratureSettings qs;
  qs.rel_tol = 1e-12;
  const double upper = quantile(1.0 - 1e-15);
  return integrate([this](double x) { return survival(x); }, 0.0, upper, qs).value;
}

double FadingDistribution::base_sample(RandomStream& stream) const {
  double acc = 0.0;
  for (int i = 0; i < shape_; ++i) acc -= std::log(stream.next_uniform());
  return scale_ * acc;
}

double FadingDistribution::sample(RandomStream& stream) const {
  if (order_ == 1) return base_sample(stream);
  // Inverse transform of the max law: base survival s = 1 - U^(1/K).
  const double u = stream.next_uniform();
  return base_quantile_from_survival(-std::expm1(std::log(u) / order_));
}

std::string FadingDistribution::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (family_ == Family::Exponential) {
    os << "exponential(mean=" << scale_ << ")";
  } else {
    os << "gamma(shape=" << shape_ << ", scale=" << scale_ << ")";
  }
  if (order_ != 1) os << "^max" << order_;
  return os.str();
}

FadingDistribution max_order_statistic(const FadingDistribution& dist, int K) {
  if (K < 1) throw DomainError("order statistic needs K >= 1");
  FadingDistribution out = dist;
  out.order_ = dist.order_ * K;
  out.set_landmarks();
  return out;
}

FadingDistribution colluding_eavesdropper(const FadingDistribution& dist, int M) {
  if (M < 1) throw DomainError("number of colluding eavesdroppers must be >= 1");
  if (dist.family() != Family::Exponential || dist.order() != 1) {
    throw UnsupportedError(
        "colluding eavesdroppers are supported for exponential gains only");
  }
  if (M == 1) return dist;
  return FadingDistribution::gamma(M, dist.scale());
}

}  // namespace wiretap
