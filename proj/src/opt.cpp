#include "wiretap/opt.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <thread>

#include "wiretap/error.hpp"
#include "wiretap/random.hpp"
#include "wiretap/rates.hpp"

namespace wiretap {

double PowerPolicy::average_power(std::span<const double> theta) const {
  double total = 0.0;
  const std::size_t n = std::min(theta.size(), powers.size());
  for (std::size_t q = 0; q < n; ++q) total += theta[q] * powers[q];
  return total;
}

double cell_gain(const Quantizer& quant, std::size_t cell, double theta, double P,
                 BoundMode mode, const FadingDistribution& main,
                 const FadingDistribution& eve, const QuadratureSettings& qs) {
  if (mode == BoundMode::LowerBound) {
    if (cell == 0) return 0.0;
    return expected_secrecy_gain(quant.lower(cell), P, eve, qs);
  }
  if (!(theta > 0.0)) return 0.0;
  return cell_secrecy_mass(quant.lower(cell), quant.upper(cell), P, main, eve, qs) /
         theta;
}

namespace {

std::vector<double> power_scan(double P_avg, double cap, const OptimizerSettings& s) {
  const int n = std::max(2, s.scan_points);
  const double lo = s.scan_lo * P_avg;
  const double hi = std::max(s.scan_hi * P_avg, cap);
  std::vector<double> grid;
  grid.reserve(n + 1);
  grid.push_back(0.0);
  for (int i = 0; i < n; ++i) {
    grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  }
  return grid;
}

struct LinePoint {
  double power = 0.0;
  double gain = 0.0;
};

// max_P g(P) - lambda P for one gain curve, reusing a coarse scan
// across multipliers.
class PowerLine {
 public:
  PowerLine(std::function<double(double)> gain, std::vector<double> grid, int bits)
      : gain_(std::move(gain)), grid_(std::move(grid)), bits_(bits) {
    values_.reserve(grid_.size());
    for (double p : grid_) values_.push_back(gain_(p));
  }

  LinePoint solve(double lambda) const {
    std::size_t best = 0;
    double best_obj = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      const double obj = values_[i] - lambda * grid_[i];
      if (obj > best_obj) {
        best_obj = obj;
        best = i;
      }
    }
    LinePoint out{grid_[best], values_[best]};
    const double a = grid_[best == 0 ? 0 : best - 1];
    const double b = grid_[std::min(best + 1, grid_.size() - 1)];
    if (!(b > a)) return out;
    std::uintmax_t iters = 200;
    const auto [p, neg] = boost::math::tools::brent_find_minima(
        [&](double x) { return lambda * x - gain_(x); }, a, b, bits_, iters);
    if (-neg > best_obj) {
      out.power = p;
      out.gain = -neg + lambda * p;
    }
    return out;
  }

  double gain(double P) const { return gain_(P); }

  /// Largest of the forward-difference slope at P = 0 and the chord slopes
  /// from 0 to every scan point. No multiplier above it powers the line on
  /// the scan.
  double steepest_slope(double h) const {
    double s = (gain_(h) - gain_(0.0)) / h;
    for (std::size_t i = 1; i < grid_.size(); ++i) {
      s = std::max(s, (values_[i] - values_[0]) / grid_[i]);
    }
    return s;
  }

 private:
  std::function<double(double)> gain_;
  std::vector<double> grid_;
  std::vector<double> values_;
  int bits_;
};

struct Allocation {
  double multiplier = 0.0;
  std::vector<LinePoint> points;
  double power = 0.0;
};

// Weighted sum of per-line powers as a function of the multiplier; the
// budget binds where it crosses `budget`.
class MultiplierSearch {
 public:
  MultiplierSearch(const std::vector<PowerLine>& lines, std::vector<double> weights,
                   double budget)
      : lines_(lines), weights_(std::move(weights)), budget_(budget) {}

  Allocation evaluate(double lambda) {
    for (const auto& a : cache_) {
      if (a.multiplier == lambda) return a;
    }
    Allocation out;
    out.multiplier = lambda;
    out.points.resize(lines_.size());
    for (std::size_t i = 0; i < lines_.size(); ++i) {
      if (weights_[i] <= 0.0) continue;
      out.points[i] = lines_[i].solve(lambda);
      out.power += weights_[i] * out.points[i].power;
    }
    if (cache_.size() > 8) cache_.erase(cache_.begin());
    cache_.push_back(out);
    ++evaluations_;
    return out;
  }

  double excess(double lambda) { return evaluate(lambda).power - budget_; }

  // Returns the allocation at the smallest multiplier found whose power fits
  // the budget.
  Allocation solve(std::optional<double> hint, double h) {
    double lambda_max = 0.0;
    for (std::size_t i = 0; i < lines_.size(); ++i) {
      if (weights_[i] > 0.0) lambda_max = std::max(lambda_max, lines_[i].steepest_slope(h));
    }
    lambda_max = lambda_max * 1.01 + 1e-300;
    for (int i = 0; i < 64 && excess(lambda_max) > 0.0; ++i) lambda_max *= 2.0;
    if (excess(0.0) <= 0.0) return evaluate(0.0);

    double lo = 0.0, hi = lambda_max;
    if (hint && *hint > 0.0 && *hint < lambda_max) {
      double a = *hint * 0.5, b = std::min(*hint * 2.0, lambda_max);
      while (a > 1e-300 && excess(a) <= 0.0) a *= 0.25;
      while (b < lambda_max && excess(b) > 0.0) b = std::min(b * 4.0, lambda_max);
      lo = excess(a) > 0.0 ? a : 0.0;
      hi = excess(b) <= 0.0 ? b : lambda_max;
    }
    double f_lo = excess(lo), f_hi = excess(hi);
    if (f_hi > 0.0) {
      throw NumericError("power multiplier bracket exhausted", f_hi);
    }
    if (f_hi == 0.0) return evaluate(hi);
    std::uintmax_t iters = 100;
    auto tol = [](double a, double b) {
      return std::abs(b - a) <= 1e-13 * std::max(std::abs(a), std::abs(b));
    };
    const auto bracket = boost::math::tools::toms748_solve(
        [&](double l) { return excess(l); }, lo, hi, f_lo, f_hi, tol, iters);
    const double a = bracket.first, b = bracket.second;
    const Allocation over = evaluate(a), under = evaluate(b);
    if (over.power <= budget_) return over;
    if (under.power >= budget_) return under;
    // Mix the two ends so the budget binds exactly; by concavity the mixed
    // powers earn at least the mixed gains.
    const double w = (budget_ - under.power) / (over.power - under.power);
    Allocation out;
    out.multiplier = w * a + (1.0 - w) * b;
    out.points.resize(lines_.size());
    for (std::size_t i = 0; i < lines_.size(); ++i) {
      if (weights_[i] <= 0.0) continue;
      const double p = w * over.points[i].power + (1.0 - w) * under.points[i].power;
      out.points[i] = {p, lines_[i].gain(p)};
      out.power += weights_[i] * p;
    }
    return out;
  }

  int evaluations() const { return evaluations_; }

 private:
  const std::vector<PowerLine>& lines_;
  std::vector<double> weights_;
  double budget_;
  std::vector<Allocation> cache_;
  int evaluations_ = 0;
};

}  // namespace

PowerOptimum optimize_powers(const Quantizer& quant, std::span<const double> theta,
                             const FadingDistribution& eve, double P_avg,
                             BoundMode mode, const FadingDistribution& main,
                             const OptimizerSettings& settings,
                             std::optional<double> multiplier_hint) {
  if (!(P_avg > 0.0) || !std::isfinite(P_avg)) {
    throw DomainError("average power budget must be positive");
  }
  if (theta.size() != quant.cells()) {
    throw DomainError("cell probability vector does not match the quantizer");
  }
  const std::size_t n = quant.cells();
  std::vector<PowerLine> lines;
  std::vector<double> weights(n, 0.0);
  lines.reserve(n);
  const QuadratureSettings qs = settings.quadrature;
  for (std::size_t q = 0; q < n; ++q) {
    const bool silent = mode == BoundMode::LowerBound && q == 0;
    const double th = theta[q];
    if (!silent && th > 0.0) weights[q] = th;
    auto gain = [&quant, q, th, mode, &main, &eve, qs](double P) {
      return cell_gain(quant, q, th, P, mode, main, eve, qs);
    };
    const double cap = th > 0.0 ? P_avg / th : 0.0;
    lines.emplace_back(gain,
                       weights[q] > 0.0 ? power_scan(P_avg, cap, settings)
                                        : std::vector<double>{0.0},
                       settings.refine_bits);
  }

  MultiplierSearch search(lines, weights, P_avg);
  const Allocation alloc = search.solve(multiplier_hint, 1e-9 * P_avg);

  PowerOptimum out;
  out.policy.avg_power_budget = P_avg;
  out.policy.powers.assign(n, 0.0);
  out.multiplier = alloc.multiplier;
  out.multiplier_iterations = search.evaluations();
  for (std::size_t q = 0; q < n; ++q) {
    if (weights[q] <= 0.0) continue;
    out.policy.powers[q] = alloc.points[q].power;
    out.value += theta[q] * alloc.points[q].gain;
  }
  return out;
}

Quantizer refine_quantizer(const Quantizer& coarse, int bits,
                           const FadingDistribution& dist) {
  if (bits < coarse.bits() || bits > 20) {
    throw DomainError("refinement needs at least as many bits as the coarse quantizer");
  }
  const std::size_t target = std::size_t{1} << bits;
  std::vector<double> t(coarse.thresholds().begin(), coarse.thresholds().end());
  if (t.size() >= target) return coarse;
  while (t.size() < target) {
    // Survival at each cell edge; cell c spans [edge c, edge c+1).
    std::vector<double> surv{1.0};
    for (double x : t) surv.push_back(dist.survival(x));
    surv.push_back(0.0);
    std::size_t heaviest = 0;
    double mass = -1.0;
    for (std::size_t c = 0; c + 1 < surv.size(); ++c) {
      if (surv[c] - surv[c + 1] > mass) {
        mass = surv[c] - surv[c + 1];
        heaviest = c;
      }
    }
    const double mid_surv = 0.5 * (surv[heaviest] + surv[heaviest + 1]);
    const double split = mid_surv > 0.5 ? dist.quantile(1.0 - mid_surv)
                                        : dist.inverse_survival(mid_surv);
    t.insert(t.begin() + static_cast<std::ptrdiff_t>(heaviest), split);
  }
  return Quantizer(std::move(t));
}

namespace {

struct StartResult {
  std::vector<double> tau;
  PowerOptimum power;
  double initial_value = 0.0;
  int rounds = 0;
};

// dg/dP and d2g/dP2 of the lower-bound cell gain g(t, P) at (t, P).
std::pair<double, double> gain_slope_and_curvature(double t, double P,
                                                   const FadingDistribution& eve,
                                                   const QuadratureSettings& qs) {
  const double a = t / (1.0 + t * P);
  const auto m = density_breaks(eve, 0.0, t);
  const auto breaks = break_points(0.0, t, {P > 0.0 ? 1.0 / P : 0.0, m[0], m[1], m[2]});
  const std::span<const double> b(breaks);
  const double d1 = integrate(
      [&](double x) { return (a - x / (1.0 + x * P)) * eve.pdf(x); }, b, qs).value;
  const double d2 = integrate(
      [&](double x) {
        const double r = x / (1.0 + x * P);
        return (r * r - a * a) * eve.pdf(x);
      }, b, qs).value;
  return {d1, d2};
}

// argmax_P g(t, P) - lambda P. dg/dP decreases in P and lies below 1 / P, so
// the root of dg/dP = lambda sits in [0, 1 / lambda].
double profiled_power(double t, double lambda, const FadingDistribution& eve,
                      const QuadratureSettings& qs, double guess) {
  if (t <= 0.0) return 0.0;
  if (gain_slope_and_curvature(t, 0.0, eve, qs).first <= lambda) return 0.0;
  const double hi = 1.0 / lambda;
  if (!(guess > 0.0 && guess < hi)) guess = 0.5 * hi;
  std::uintmax_t iters = 100;
  return boost::math::tools::newton_raphson_iterate(
      [&](double P) {
        const auto [d1, d2] = gain_slope_and_curvature(t, P, eve, qs);
        return std::make_pair(d1 - lambda, d2);
      },
      guess, 0.0, hi, 40, iters);
}

// h(t) = max_P g(t, P) - lambda P for the lower-bound cell gain
// g(t, P) = E_e[{ln((1 + t P) / (1 + gamma_e P))}^+], tabulated on a knot grid
// with its exact slope dh/dt = P*(t) cdf_e(t) / (1 + t P*(t)) and evaluated
// by cubic Hermite interpolation.
class ProfiledGain {
 public:
  ProfiledGain(const FadingDistribution& eve, const FadingDistribution& main,
               double lambda, double top, const OptimizerSettings& settings)
      : eve_(eve), lambda_(lambda), qs_(settings.quadrature) {
    const int M = std::max(16, settings.profile_knots);
    std::vector<double> knots{0.0};
    for (int i = 1; i < M; ++i) {
      const double t = main.quantile(static_cast<double>(i) / M);
      if (t < top) knots.push_back(t);
    }
    for (double s = 1.0 / M; ; s *= 0.25) {
      const double t = main.inverse_survival(s);
      if (t >= top) break;
      if (t > knots.back()) knots.push_back(t);
    }
    knots.push_back(top);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    x_ = knots;
    y_.resize(x_.size());
    dy_.resize(x_.size());
    double guess = 0.0;
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const double t = x_[i];
      const double P = profiled_power(t, lambda_, eve_, qs_, guess);
      guess = P;
      y_[i] = P > 0.0 ? expected_secrecy_gain(t, P, eve_, qs_) - lambda_ * P : 0.0;
      dy_[i] = P * eve_.cdf(t) / (1.0 + t * P);
    }
  }

  double operator()(double t) const {
    if (t <= x_.front()) return y_.front();
    if (t >= x_.back()) return y_.back() + dy_.back() * (t - x_.back());
    const auto it = std::upper_bound(x_.begin(), x_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double h = x_[i + 1] - x_[i];
    const double s = (t - x_[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y_[i] + (s3 - 2 * s2 + s) * h * dy_[i] +
           (-2 * s3 + 3 * s2) * y_[i + 1] + (s3 - s2) * h * dy_[i + 1];
  }

 private:
  const FadingDistribution& eve_;
  double lambda_;
  QuadratureSettings qs_;
  std::vector<double> x_, y_, dy_;
};

class ThresholdAscent {
 public:
  ThresholdAscent(const FadingDistribution& main, const FadingDistribution& eve,
                  double P_avg, BoundMode mode, const OptimizerSettings& settings)
      : main_(main), eve_(eve), P_avg_(P_avg), mode_(mode), settings_(settings) {}

  StartResult run(std::vector<double> tau) const {
    StartResult best;
    best.tau = tau;
    best.power = solve_powers(tau, std::nullopt);
    best.initial_value = best.power.value;
    for (int round = 1; round <= settings_.max_rounds; ++round) {
      best.rounds = round;
      std::vector<double> moved = best.tau;
      update_points(moved, best.power);
      const PowerOptimum next = solve_powers(moved, best.power.multiplier);
      const double gain = next.value - best.power.value;
      if (gain > 0.0) {
        best.tau = std::move(moved);
        best.power = next;
      }
      if (gain < settings_.round_tolerance) break;
    }
    return best;
  }

 private:
  PowerOptimum solve_powers(const std::vector<double>& tau,
                            std::optional<double> hint) const {
    const Quantizer quant(tau);
    const auto theta = cell_probabilities(quant, main_);
    return optimize_powers(quant, theta, eve_, P_avg_, mode_, main_, settings_, hint);
  }

  double surv(double x) const { return std::isinf(x) ? 0.0 : main_.survival(x); }

  double sweep_limit(double tau_top) const {
    return std::max(main_.quantile(settings_.quadrature.tail_quantile), 2.0 * tau_top);
  }

  // Largest relative move of any point.
  static double relative_move(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]) / b[i]);
    return m;
  }

  void update_points(std::vector<double>& tau, const PowerOptimum& state) const {
    if (mode_ == BoundMode::LowerBound) {
      update_points_lower(tau, state.multiplier);
    } else {
      update_points_upper(tau, state);
    }
  }

  // Lower bound: with the multiplier fixed and every cell free to pick its
  // power, cell q is worth h(tau_q) = max_P g(tau_q, P) - lambda P per unit
  // probability. The points then maximise
  //   sum_q (S(tau_q) - S(tau_{q+1})) h(tau_q),
  // solved by Gauss-Seidel line searches on an interpolant of h.
  void update_points_lower(std::vector<double>& tau, double lambda) const {
    const std::size_t Q = tau.size();
    const double top = sweep_limit(tau.back());
    const ProfiledGain h(eve_, main_, lambda, top, settings_);
    for (int pass = 0; pass < settings_.sweeps_per_round; ++pass) {
      const std::vector<double> before = tau;
      for (std::size_t q = 1; q <= Q; ++q) {
        const double lo = q == 1 ? 0.0 : tau[q - 2];
        const double hi = q == Q ? top : tau[q];
        const double below = q == 1 ? 0.0 : h(lo);
        const double s_lo = surv(lo), s_hi = q == Q ? 0.0 : surv(hi);
        auto local = [&](double t) {
          const double st = surv(t);
          return below * (s_lo - st) + h(t) * (st - s_hi);
        };
        const double margin = 1e-9 * (hi - lo);
        const double a = lo + margin, b = hi - margin;
        if (!(b > a)) continue;
        const double current = local(tau[q - 1]);
        std::uintmax_t iters = 200;
        const auto [t, neg] = boost::math::tools::brent_find_minima(
            [&](double x) { return -local(x); }, a, b, 40, iters);
        if (-neg > current && t > lo && t < hi) tau[q - 1] = t;
      }
      if (relative_move(tau, before) < 1e-10) break;
    }
  }

  // Upper bound: with powers and multiplier fixed the Lagrangian's slope in
  // tau_q is pdf(tau_q) times the gap between the pointwise Lagrangians of
  // the two adjacent cells, so every point sits where they cross.
  void update_points_upper(std::vector<double>& tau, const PowerOptimum& state) const {
    const auto& qs = settings_.quadrature;
    const auto& P = state.policy.powers;
    const double lambda = state.multiplier;
    const std::size_t Q = tau.size();
    const double top = sweep_limit(tau.back());
    const std::vector<double> old = tau;
    for (std::size_t q = 1; q <= Q; ++q) {
      const double lo = q == 1 ? 0.0 : tau[q - 2];
      const double hi = q == Q ? top : old[q];
      const double p_below = P[q - 1], p_cell = P[q];
      auto gap = [&](double t) {
        return (expected_secrecy_gain(t, p_below, eve_, qs) - lambda * p_below) -
               (expected_secrecy_gain(t, p_cell, eve_, qs) - lambda * p_cell);
      };
      const double margin = 1e-9 * (hi - lo);
      const double a = lo + margin, b = hi - margin;
      if (!(b > a)) continue;
      const double ga = gap(a), gb = gap(b);
      double t = tau[q - 1];
      if (ga <= 0.0 && gb <= 0.0) {
        t = a;
      } else if (ga >= 0.0 && gb >= 0.0) {
        t = b;
      } else if (ga > 0.0 && gb < 0.0) {
        std::uintmax_t iters = 100;
        auto tol = [](double x, double y) { return std::abs(y - x) <= 1e-12 * y; };
        const auto r = boost::math::tools::toms748_solve(gap, a, b, ga, gb, tol, iters);
        t = 0.5 * (r.first + r.second);
      }
      // An increasing gap marks a local minimum; leave the point alone.
      if (t > lo && t < hi) tau[q - 1] = t;
    }
  }

  const FadingDistribution& main_;
  const FadingDistribution& eve_;
  double P_avg_;
  BoundMode mode_;
  const OptimizerSettings& settings_;
};

std::vector<double> jittered_start(const FadingDistribution& dist, std::size_t Q,
                                   double spread, std::uint64_t seed, int index) {
  RandomStream stream(seed, static_cast<std::uint64_t>(index), 0x51a7);
  std::vector<double> widths(Q + 1);
  double total = 0.0;
  for (auto& w : widths) {
    w = std::exp(spread * (2.0 * stream.next_uniform() - 1.0));
    total += w;
  }
  std::vector<double> tau(Q);
  double cum = 0.0;
  for (std::size_t q = 0; q < Q; ++q) {
    cum += widths[q] / total;
    tau[q] = dist.quantile(std::min(cum, 1.0 - 1e-12));
  }
  for (std::size_t q = 1; q < Q; ++q) {
    if (!(tau[q] > tau[q - 1])) tau[q] = std::nextafter(tau[q - 1], 1e300);
  }
  return tau;
}

}  // namespace

JointOptimum optimize_thresholds_and_powers(const FadingDistribution& main,
                                            const FadingDistribution& eve, int bits,
                                            double P_avg, BoundMode mode,
                                            const OptimizerSettings& settings,
                                            const std::optional<Quantizer>& warm_start) {
  if (bits < 0 || bits > 12) throw DomainError("feedback bits must lie in 0..12");
  if (!(P_avg > 0.0)) throw DomainError("average power budget must be positive");
  const std::size_t Q = std::size_t{1} << bits;

  std::vector<std::vector<double>> starts;
  const auto base = equiprobable_quantizer(main, bits);
  starts.emplace_back(base.thresholds().begin(), base.thresholds().end());
  for (int i = 1; i <= settings.perturbed_starts; ++i) {
    starts.push_back(jittered_start(main, Q, settings.perturbation, settings.seed, i));
  }
  if (warm_start && warm_start->levels() <= Q) {
    const auto refined = refine_quantizer(*warm_start, bits, main);
    starts.emplace_back(refined.thresholds().begin(), refined.thresholds().end());
  }

  const ThresholdAscent ascent(main, eve, P_avg, mode, settings);
  std::vector<StartResult> results(starts.size());
  std::vector<std::exception_ptr> errors(starts.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < starts.size(); i += stride) {
      try {
        results[i] = ascent.run(starts[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1, settings.workers)), 1,
                              starts.size());
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    if (results[i].power.value > results[best].power.value) best = i;
  }
  JointOptimum out{Quantizer(results[best].tau), results[best].power.policy,
                   results[best].power.value, results[best].power.multiplier,
                   results[best].rounds, static_cast<int>(best), {}, {}};
  for (const auto& r : results) {
    out.initial_values.push_back(r.initial_value);
    out.final_values.push_back(r.power.value);
  }
  return out;
}

double csi_power(double gamma, double multiplier, const FadingDistribution& eve,
                 double P_avg, const OptimizerSettings& settings) {
  const QuadratureSettings qs = settings.quadrature;
  PowerLine line([&](double P) { return expected_secrecy_gain(gamma, P, eve, qs); },
                 power_scan(P_avg, 0.0, settings), settings.refine_bits);
  return line.solve(multiplier).power;
}

CsiPowerProfile perfect_csi_power_policy(const FadingDistribution& main,
                                         const FadingDistribution& eve,
                                         double P_avg, int grid_size,
                                         const OptimizerSettings& settings) {
  if (grid_size < 256) throw DomainError("perfect-CSI grid needs at least 256 points");
  if (!(P_avg > 0.0)) throw DomainError("average power budget must be positive");
  const QuadratureSettings qs = settings.quadrature;
  CsiPowerProfile out;
  out.avg_power_budget = P_avg;
  out.grid.resize(grid_size);
  std::vector<PowerLine> lines;
  lines.reserve(grid_size);
  const auto scan = power_scan(P_avg, 0.0, settings);
  for (int i = 0; i < grid_size; ++i) {
    const double g = main.quantile(static_cast<double>(i + 1) / (grid_size + 1));
    out.grid[i] = g;
    lines.emplace_back([g, &eve, qs](double P) { return expected_secrecy_gain(g, P, eve, qs); },
                       scan, settings.refine_bits);
  }
  MultiplierSearch search(lines, std::vector<double>(grid_size, 1.0 / grid_size), P_avg);
  const Allocation alloc = search.solve(std::nullopt, 1e-9 * P_avg);
  out.lagrange_multiplier = alloc.multiplier;
  out.powers.resize(grid_size);
  for (int i = 0; i < grid_size; ++i) out.powers[i] = alloc.points[i].power;
  return out;
}

double perfect_csi_dual_value(const FadingDistribution& main,
                              const FadingDistribution& eve, double P_avg,
                              double multiplier, const QuadratureSettings& qs) {
  if (!(P_avg > 0.0)) throw DomainError("average power budget must be positive");
  if (!(multiplier > 0.0)) throw DomainError("multiplier must be positive");
  // Gains below gamma_star stay silent: there dg/dP at 0 is at most lambda.
  auto slope0 = [&](double t) {
    return gain_slope_and_curvature(t, 0.0, eve, qs).first - multiplier;
  };
  double hi = std::max(1.0, eve.mean());
  while (slope0(hi) <= 0.0) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericError("no gain reaches the multiplier", multiplier);
  }
  std::uintmax_t iters = 200;
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-14 * b; };
  const auto root = boost::math::tools::bisect(slope0, 0.0, hi, tol, iters);
  const double gamma_star = 0.5 * (root.first + root.second);
  const double top = tail_cutoff(gamma_star, main, qs);
  if (!(top > gamma_star)) return multiplier * P_avg;

  double guess = 0.0;
  auto integrand = [&](double g) {
    const double P = profiled_power(g, multiplier, eve, qs, guess);
    if (P > 0.0) guess = P;
    const double v = P > 0.0 ? expected_secrecy_gain(g, P, eve, qs) - multiplier * P : 0.0;
    return main.pdf(g) * std::max(0.0, v);
  };
  const auto m = density_breaks(main, gamma_star, top);
  const auto breaks = break_points(gamma_star, top, {main.quantile(0.5), m[0], m[1], m[2]});
  return integrate(integrand, std::span<const double>(breaks), qs).value +
         multiplier * P_avg;
}

CsiCapacity perfect_csi_capacity(const FadingDistribution& main,
                                 const FadingDistribution& eve, double P_avg,
                                 double multiplier_hint, const QuadratureSettings& qs) {
  if (!(multiplier_hint > 0.0) || !std::isfinite(multiplier_hint)) multiplier_hint = 1.0;
  // D is convex in lambda, hence unimodal in log lambda.
  auto dual = [&](double u) { return perfect_csi_dual_value(main, eve, P_avg, std::exp(u), qs); };
  const double centre = std::log(multiplier_hint);
  std::uintmax_t iters = 200;
  const auto [u, value] =
      boost::math::tools::brent_find_minima(dual, centre - 12.0, centre + 6.0, 40, iters);
  // Never report worse than the hint itself.
  const double at_hint = dual(centre);
  if (at_hint <= value) return {at_hint, multiplier_hint};
  return {value, std::exp(u)};
}

KktReport check_kkt(const Quantizer& quant, std::span<const double> theta,
                    const PowerPolicy& policy, double multiplier, BoundMode mode,
                    const FadingDistribution& main, const FadingDistribution& eve,
                    const QuadratureSettings& qs, double rel_tol, double abs_tol) {
  KktReport report;
  const std::size_t n = quant.cells();
  report.derivatives.assign(n, 0.0);
  for (std::size_t q = 0; q < n; ++q) {
    if (mode == BoundMode::LowerBound && q == 0) continue;
    if (!(theta[q] > 0.0)) continue;
    auto g = [&](double P) { return cell_gain(quant, q, theta[q], P, mode, main, eve, qs); };
    const double P = policy.powers[q];
    double d = 0.0, violation = 0.0;
    if (P > 0.0) {
      const double h = 1e-3 * P;
      d = (g(P + h) - g(P - h)) / (2.0 * h);
      violation = std::abs(d - multiplier);
      if (violation > rel_tol * multiplier + abs_tol) report.satisfied = false;
    } else {
      const double h = 1e-6 * policy.avg_power_budget;
      d = (g(h) - g(0.0)) / h;
      violation = std::max(0.0, d - multiplier);
      if (d > multiplier + abs_tol) report.satisfied = false;
    }
    report.derivatives[q] = d;
    report.worst_violation = std::max(report.worst_violation, violation);
  }
  return report;
}

}  // namespace wiretap
