#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "wiretap/bounds.hpp"
#include "wiretap/config.hpp"

namespace wiretap {

/// One CSV row. Perfect-CSI rows carry b = 0 and mode "perfect".
struct SweepRow {
  Scenario scenario = Scenario::Common;
  int K = 1;
  int b = 0;
  std::string mode;
  double snr_db = 0.0;
  BoundKind kind = BoundKind::CommonLower;
  double value = 0.0;
  /// Optimizer rounds (finite b) or 0 (perfect CSI).
  double diag_iters = 0.0;
  /// BoundResult diagnostics "gap".
  double diag_gap = 0.0;
};

/// Evaluates every selected bound at every (snr, b, K). Operating points
/// with the same (snr, K) run b in ascending order, each warm-started from
/// the previous b; independent points run on `workers` threads. Rows come
/// back sorted by (K, mode, b, snr, kind).
std::vector<SweepRow> run_sweep(const RunConfig& cfg);

/// Header scenario,K,b,mode,snr_db,bound_kind,value_npcu,diag_iters,diag_gap.
/// Values print with 17 significant digits so they read back bit for bit.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

struct ValidateOptions {
  /// Replace the optimized powers by zeros.
  bool zero_power = false;
  /// Simulate with every threshold multiplied by this factor while keeping
  /// the analytic value of the original thresholds (negative control).
  double threshold_scale = 1.0;
};

struct ValidateReport {
  double analytic = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  double mean_power = 0.0;
  bool pass = false;
};

/// Optimizes (tau, P) for the single operating point in `cfg`, simulates the
/// scheme for cfg.blocks blocks and compares against the analytic rate of
/// the same scheme at 3 standard errors.
ValidateReport run_validate(const RunConfig& cfg, const ValidateOptions& options = {});

/// Every selected bound at the single operating point in `cfg`, in the
/// order lower, upper, perfect.
std::vector<BoundResult> bounds_at(const RunConfig& cfg);

/// Lower-bound result used to drive simulations at the single operating
/// point in `cfg`.
BoundResult lower_bound_at(const RunConfig& cfg);

}  // namespace wiretap
