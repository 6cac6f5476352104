#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "wiretap/bounds.hpp"
#include "wiretap/dist.hpp"
#include "wiretap/opt.hpp"
#include "wiretap/quantize.hpp"

namespace wiretap {

/// Block-fading Monte Carlo setup. Every receiver quantizes its own gain
/// with the shared `quantizer`; the transmitter then uses the cell chosen by
/// the selection rule of the scenario being simulated.
struct SimConfig {
  std::uint64_t blocks = 0;
  std::uint64_t seed = 0;
  std::vector<FadingDistribution> mains;
  FadingDistribution eve;
  Quantizer quantizer;
  PowerPolicy policy;
  int workers = 1;
  /// Store per-block records; the estimates do not depend on it.
  bool keep_trace = true;

  int receivers() const { return static_cast<int>(mains.size()); }
  /// Throws DomainError on an empty run, no receivers or a policy that does
  /// not match the quantizer.
  void validate() const;
};

/// Per-block records, one array per column. gains and feedback are
/// row-major with receivers() entries per block.
struct BlockFadingTrace {
  int K = 0;
  std::vector<double> gains;
  std::vector<double> eve_gain;
  std::vector<std::uint32_t> feedback;
  std::vector<std::uint32_t> selected;
  std::vector<std::uint32_t> receiver;
  std::vector<double> power;
  /// ln(1 + tau_q P_q) for the selected cell, 0 for cell 0.
  std::vector<double> rate;
  /// max(0, rate - ln(1 + gamma_e P_q)).
  std::vector<double> increment;

  std::size_t size() const { return selected.size(); }
  double gain(std::size_t block, int k) const {
    return gains[block * static_cast<std::size_t>(K) + static_cast<std::size_t>(k)];
  }
};

struct SimResult {
  BlockFadingTrace trace;
  /// Block average of the secrecy increment, nats per channel use.
  double rate_estimate = 0.0;
  double std_error = 0.0;
  double mean_power = 0.0;
  double power_std_error = 0.0;
};

/// Common message: the weakest fed-back cell is served.
SimResult simulate_common(const SimConfig& cfg);

/// Independent messages: the strongest fed-back cell is served; ties between
/// receivers are broken uniformly at random from the seeded stream.
SimResult simulate_sum(const SimConfig& cfg);

SimResult simulate(const SimConfig& cfg, Selection rule);

/// Recomputes every increment from the stored gains and returns the block
/// average; matches the original estimate bit for bit.
double replay_rate(const BlockFadingTrace& trace, const Quantizer& quant,
                   const PowerPolicy& policy, Selection rule);

/// Frequency of each selected cell. Needs at least 10^4 blocks.
std::vector<double> empirical_cell_occupancy(const BlockFadingTrace& trace,
                                             std::size_t cells);

struct OccupancyTest {
  double chi_square = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;
  /// p_value >= the significance level.
  bool consistent = true;
};

/// Pearson chi-square of the observed selections against `expected`.
OccupancyTest occupancy_chi_square(const BlockFadingTrace& trace,
                                   const std::vector<double>& expected,
                                   double significance = 0.01);

/// CSV with header block,gamma_1..gamma_K,gamma_e,q_sel,power,rate,increment.
void write_trace_csv(std::ostream& out, const BlockFadingTrace& trace);

}  // namespace wiretap
