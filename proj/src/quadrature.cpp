#include "wiretap/quadrature.hpp"

namespace wiretap {

void QuadratureSettings::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw DomainError("quadrature tolerances must be positive");
  }
  if (!(tail_quantile > 0.0) || !(tail_quantile < 1.0)) {
    throw DomainError("tail quantile must lie in (0, 1)");
  }
  if (max_subdivisions < 1) {
    throw DomainError("quadrature needs at least one subdivision");
  }
}

std::vector<double> break_points(double a, double b,
                                 std::initializer_list<double> interior) {
  std::vector<double> pts{a};
  for (double x : interior) {
    if (x > a && x < b) pts.push_back(x);
  }
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace wiretap
