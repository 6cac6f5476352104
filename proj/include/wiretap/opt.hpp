#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wiretap/dist.hpp"
#include "wiretap/quadrature.hpp"
#include "wiretap/quantize.hpp"

namespace wiretap {

/// Which bound the per-cell objective evaluates.
///
/// LowerBound: cell q earns E_e[{ln((1 + tau_q P_q) / (1 + gamma_e P_q))}^+]
/// and cell 0 is silent (P_0 = 0). UpperBound: cell q earns the same ratio
/// with the true main gain, conditioned on the cell; cell 0 may carry power.
enum class BoundMode { LowerBound, UpperBound };

/// Transmit power per feedback cell, P_0..P_Q.
struct PowerPolicy {
  std::vector<double> powers;
  double avg_power_budget = 0.0;

  /// sum_q theta_q P_q
  double average_power(std::span<const double> theta) const;
};

/// Perfect-CSI power control P(gamma) sampled on a quantile grid.
struct CsiPowerProfile {
  std::vector<double> grid;
  std::vector<double> powers;
  double lagrange_multiplier = 0.0;
  double avg_power_budget = 0.0;
};

struct OptimizerSettings {
  QuadratureSettings quadrature;
  /// Coarse power scan: log-spaced over [scan_lo, scan_hi] * P_avg plus P = 0.
  int scan_points = 64;
  double scan_lo = 1e-4;
  double scan_hi = 1e3;
  /// Bits of relative precision for the Brent power refinement.
  int refine_bits = 30;
  /// Multistart: the equiprobable quantizer plus `perturbed_starts` jittered copies.
  int perturbed_starts = 4;
  double perturbation = 0.5;
  int max_rounds = 100;
  /// Gauss-Seidel passes over the points between consecutive power solves.
  int sweeps_per_round = 2000;
  /// Knots of the profiled lower-bound cell value used by the point updates.
  int profile_knots = 256;
  double round_tolerance = 1e-7;
  std::uint64_t seed = 1;
  /// Threads used for independent multistarts; results do not depend on it.
  int workers = 1;
};

struct PowerOptimum {
  PowerPolicy policy;
  /// sum_q theta_q g_q(P_q), nats per channel use.
  double value = 0.0;
  double multiplier = 0.0;
  int multiplier_iterations = 0;
};

/// Maximise sum_q theta_q g_q(P_q) subject to sum_q theta_q P_q <= P_avg for
/// fixed reconstruction points.
///
/// Lagrangian decomposition: for a multiplier lambda every cell solves
/// max_P g_q(P) - lambda P independently (coarse scan, then Brent
/// refinement); lambda is bracketed and solved so the budget binds.
/// `multiplier_hint` seeds the bracket.
PowerOptimum optimize_powers(const Quantizer& quant, std::span<const double> theta,
                             const FadingDistribution& eve, double P_avg,
                             BoundMode mode, const FadingDistribution& main,
                             const OptimizerSettings& settings = {},
                             std::optional<double> multiplier_hint = {});

struct JointOptimum {
  Quantizer quantizer;
  PowerPolicy policy;
  /// Best objective found; a lower estimate of the true maximum.
  double value = 0.0;
  double multiplier = 0.0;
  int rounds = 0;
  int best_start = 0;
  /// Objective at every start after its first power solve, then at its end.
  std::vector<double> initial_values;
  std::vector<double> final_values;
};

/// Joint maximisation over reconstruction points and powers.
///
/// Alternating ascent from several starts: solve the powers at fixed points,
/// then move each point inside its neighbours' interval to maximise the
/// Lagrangian at the current multiplier; repeat until a round improves the
/// objective by less than `round_tolerance`. In LowerBound mode each cell's
/// power is re-optimised along with its point; in UpperBound mode powers stay
/// fixed during the point update. Starts are the
/// equiprobable quantizer, its jittered copies and, when given, `warm_start`
/// refined to 2^bits points by splitting its heaviest cells.
JointOptimum optimize_thresholds_and_powers(
    const FadingDistribution& main, const FadingDistribution& eve, int bits,
    double P_avg, BoundMode mode, const OptimizerSettings& settings = {},
    const std::optional<Quantizer>& warm_start = std::nullopt);

/// Quantizer with 2^bits points containing every point of `coarse`; extra
/// points halve the most probable cells.
Quantizer refine_quantizer(const Quantizer& coarse, int bits,
                           const FadingDistribution& dist);

/// Perfect-CSI power control: on the grid gamma_i = quantile(i / (N + 1)),
/// P(gamma_i) maximises E_e[{ln((1 + gamma_i P) / (1 + gamma_e P))}^+] - lambda P,
/// with lambda set so the grid average of P equals P_avg.
CsiPowerProfile perfect_csi_power_policy(const FadingDistribution& main,
                                         const FadingDistribution& eve,
                                         double P_avg, int grid_size,
                                         const OptimizerSettings& settings = {});

/// Dual function of the perfect-CSI problem,
///   D(lambda) = E_m[max_P E_e[...](gamma, P) - lambda P] + lambda P_avg,
/// by adaptive quadrature. D(lambda) bounds the perfect-CSI capacity from
/// above for every lambda > 0 and meets it at the optimal multiplier.
double perfect_csi_dual_value(const FadingDistribution& main,
                              const FadingDistribution& eve, double P_avg,
                              double multiplier, const QuadratureSettings& qs = {});

struct CsiCapacity {
  double value = 0.0;
  double multiplier = 0.0;
};

/// Perfect-CSI capacity as min over lambda of the dual function, searched in
/// log lambda around `multiplier_hint`.
CsiCapacity perfect_csi_capacity(const FadingDistribution& main,
                                 const FadingDistribution& eve, double P_avg,
                                 double multiplier_hint, const QuadratureSettings& qs = {});

/// Power that maximises E_e[...](gamma, P) - lambda P for a single gain.
double csi_power(double gamma, double multiplier, const FadingDistribution& eve,
                 double P_avg, const OptimizerSettings& settings = {});

/// Per-cell objective g_q(P): normalised so the budget reads sum theta_q P_q.
double cell_gain(const Quantizer& quant, std::size_t cell, double theta, double P,
                 BoundMode mode, const FadingDistribution& main,
                 const FadingDistribution& eve, const QuadratureSettings& qs = {});

struct KktReport {
  bool satisfied = true;
  /// Numerical dg_q/dP at P_q for every cell (0 for silent cells).
  std::vector<double> derivatives;
  /// Largest |derivative - lambda| over powered cells, or excess over lambda
  /// for unpowered ones.
  double worst_violation = 0.0;
};

/// Stationarity check: dg_q/dP equals lambda (within rel_tol * lambda +
/// abs_tol) wherever P_q > 0, and does not exceed lambda + abs_tol where
/// P_q = 0.
KktReport check_kkt(const Quantizer& quant, std::span<const double> theta,
                    const PowerPolicy& policy, double multiplier, BoundMode mode,
                    const FadingDistribution& main, const FadingDistribution& eve,
                    const QuadratureSettings& qs = {}, double rel_tol = 1e-3,
                    double abs_tol = 1e-6);

}  // namespace wiretap
