#pragma once

#include <array>

#include "wiretap/dist.hpp"
#include "wiretap/quadrature.hpp"

namespace wiretap {

/// The distribution's landmarks when its bulk is narrow next to [a, b],
/// otherwise NaNs (which break_points drops).
std::array<double, 3> density_breaks(const FadingDistribution& dist, double a, double b);

/// max(0, ln(1 + gm P) - ln(1 + ge P)) in nats.
double pos_log_ratio(double gm, double ge, double P);

/// E_e[{ln((1 + tau P) / (1 + gamma_e P))}^+]: secrecy rate of a codeword sent
/// at rate ln(1 + tau P), averaged over the eavesdropper gain.
///
/// The positive part vanishes for gamma_e >= tau, so the integral runs over
/// [0, tau] only and the kink sits on the boundary.
double expected_secrecy_gain(double tau, double P, const FadingDistribution& eve,
                             const QuadratureSettings& qs = {});

/// Unnormalised cell contribution
///   int_{lo}^{hi} pdf_m(g) E_e[{ln((1 + g P) / (1 + gamma_e P))}^+] dg.
///
/// Evaluated as two single integrals after exchanging the order of
/// integration:
///   int_lo^hi pdf_m(g) cdf_e(g) ln(1 + g P) dg
///     - int_0^hi ln(1 + x P) pdf_e(x) Pr[max(lo, x) <= gamma_m < hi] dx.
/// An infinite `hi` is truncated in the main-gain tail (see QuadratureSettings).
double cell_secrecy_mass(double lo, double hi, double P,
                         const FadingDistribution& main,
                         const FadingDistribution& eve,
                         const QuadratureSettings& qs = {});

/// E[{ln((1 + gamma_m P) / (1 + gamma_e P))}^+ | lo <= gamma_m < hi].
/// Throws DomainError for an empty or zero-probability cell.
double conditional_upper_gain(double lo, double hi, double P,
                              const FadingDistribution& main,
                              const FadingDistribution& eve,
                              const QuadratureSettings& qs = {});

/// Same quantity as conditional_upper_gain by nested adaptive quadrature:
/// the outer pass over gamma_m calls expected_secrecy_gain at every node.
/// Slower; kept as an independent route.
double conditional_upper_gain_nested(double lo, double hi, double P,
                                     const FadingDistribution& main,
                                     const FadingDistribution& eve,
                                     const QuadratureSettings& qs = {});

/// Upper integration limit used for a cell that extends to infinity.
double tail_cutoff(double lo, const FadingDistribution& dist,
                   const QuadratureSettings& qs);

}  // namespace wiretap
