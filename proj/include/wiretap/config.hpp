#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "wiretap/bounds.hpp"
#include "wiretap/dist.hpp"

namespace wiretap {

enum class Scenario { Common, Sum };

std::string to_string(Scenario s);
std::string to_string(ThresholdMode m);

/// Run description shared by every CLI subcommand.
///
/// Config files hold one `key = value` pair per line; `#` starts a comment.
/// Lists are comma separated. Keys:
///   snr_db, bits, receivers     lists of operating points
///   scenario                    common | sum
///   thresholds                  optimized | equiprobable
///   main_means                  one mean for every receiver, or one per receiver
///   eve_mean                    eavesdropper mean gain
///   bounds                      any of lower, upper, perfect
///   blocks, seed, workers, out  simulation length, RNG seed, threads, output path
///   quantizer, powers           fixed thresholds and per-cell powers for simulate
struct RunConfig {
  std::vector<double> snr_db;
  std::vector<int> bits;
  std::vector<int> receivers{1};
  Scenario scenario = Scenario::Common;
  ThresholdMode thresholds = ThresholdMode::Optimized;
  std::vector<double> main_means{1.0};
  double eve_mean = 1.0;
  bool lower = true;
  bool upper = true;
  bool perfect = true;
  std::uint64_t blocks = 1'000'000;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out;
  /// Empty unless a fixed scheme is supplied.
  std::vector<double> quantizer;
  std::vector<double> powers;

  /// Throws UsageError naming the offending key.
  void validate() const;

  /// Receiver distributions for K receivers.
  std::vector<FadingDistribution> mains(int K) const;
  FadingDistribution eve() const;
};

/// Sets one key from its text value; throws UsageError on unknown keys or
/// malformed values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Reads `key = value` lines into `cfg`. Errors are reported as UsageError
/// with "source:line: " prefixes.
void parse_config(std::istream& in, const std::string& source, RunConfig& cfg);

/// `quantizer = ...` and `powers = ...` lines that parse_config reads back
/// bit for bit.
std::string format_scheme(const Quantizer& quant, const PowerPolicy& policy);

/// P_avg = 10^(snr_db / 10) for unit noise power.
double snr_to_power(double snr_db);

}  // namespace wiretap
