#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "wiretap/dist.hpp"
#include "wiretap/opt.hpp"
#include "wiretap/quantize.hpp"

namespace wiretap {

enum class BoundKind {
  CommonLower,
  CommonUpper,
  SumLower,
  SumUpper,
  CommonPerfectCsi,
  SumPerfectCsi,
};

std::string to_string(BoundKind kind);

/// How reconstruction points are chosen for finite-b bounds.
enum class ThresholdMode { Optimized, Equiprobable };

/// Which receiver's feedback index drives the transmission.
enum class Selection {
  /// Common message: the weakest quantized gain.
  Min,
  /// Independent messages: the strongest quantized gain.
  Max,
};

struct BoundSettings {
  OptimizerSettings optimizer;
  ThresholdMode thresholds = ThresholdMode::Optimized;
  /// Quantile grid size for perfect-CSI power control.
  int csi_grid = 512;
};

/// Optimum for one receiver's gain distribution.
struct ReceiverBound {
  std::size_t receiver = 0;
  double value = 0.0;
  std::optional<Quantizer> quantizer;
  std::variant<PowerPolicy, CsiPowerProfile> policy;
  double multiplier = 0.0;
  int rounds = 0;
  /// Finite b: best minus worst multistart value. Perfect CSI: dual value
  /// minus the grid average of the primal objective.
  double gap = 0.0;
};

struct BoundResult {
  BoundKind kind = BoundKind::CommonLower;
  /// nats per channel use
  double value = 0.0;
  /// Feedback bits; absent for perfect-CSI kinds.
  std::optional<int> bits;
  double avg_power_budget = 0.0;
  std::optional<Quantizer> quantizer;
  std::variant<PowerPolicy, CsiPowerProfile> policy;
  /// Receiver attaining the common-message minimum.
  std::optional<std::size_t> bottleneck_receiver;
  std::map<std::string, double> diagnostics;
  /// One entry per receiver (common message) or a single entry for the
  /// strongest-receiver view (sum rate).
  std::vector<ReceiverBound> receivers;

  nlohmann::json to_json() const;
};

/// min over k of max over (tau, P) of sum_{q>=1} Theta_q^k E_e[{ln((1 + tau_q P_q) / (1 + gamma_e P_q))}^+].
/// Receivers with identical distributions are solved once.
BoundResult common_message_lower(const std::vector<FadingDistribution>& mains,
                                 const FadingDistribution& eve, int bits, double P_avg,
                                 const BoundSettings& settings = {},
                                 const BoundResult* warm_start = nullptr);

/// As common_message_lower with the true gain inside each cell and cell 0 powered.
BoundResult common_message_upper(const std::vector<FadingDistribution>& mains,
                                 const FadingDistribution& eve, int bits, double P_avg,
                                 const BoundSettings& settings = {},
                                 const BoundResult* warm_start = nullptr);

/// Lower bound on the secrecy sum rate of K i.i.d. receivers, evaluated on
/// gamma_max = max_k gamma_k.
BoundResult sum_rate_lower(const FadingDistribution& main, int K,
                           const FadingDistribution& eve, int bits, double P_avg,
                           const BoundSettings& settings = {},
                           const BoundResult* warm_start = nullptr);

BoundResult sum_rate_upper(const FadingDistribution& main, int K,
                           const FadingDistribution& eve, int bits, double P_avg,
                           const BoundSettings& settings = {},
                           const BoundResult* warm_start = nullptr);

/// Sum-rate entry points taking one distribution per receiver; all must be
/// identical, otherwise UnsupportedError.
BoundResult sum_rate_lower(const std::vector<FadingDistribution>& mains,
                           const FadingDistribution& eve, int bits, double P_avg,
                           const BoundSettings& settings = {},
                           const BoundResult* warm_start = nullptr);
BoundResult sum_rate_upper(const std::vector<FadingDistribution>& mains,
                           const FadingDistribution& eve, int bits, double P_avg,
                           const BoundSettings& settings = {},
                           const BoundResult* warm_start = nullptr);

/// Perfect main CSI at the transmitter: min over k of
/// max_{E[P] <= P_avg} E[{ln((1 + gamma_k P(gamma_k)) / (1 + gamma_e P(gamma_k)))}^+].
/// The value is the dual function at the multiplier found on the power grid.
BoundResult perfect_csi_common(const std::vector<FadingDistribution>& mains,
                               const FadingDistribution& eve, double P_avg,
                               const BoundSettings& settings = {});

BoundResult perfect_csi_sum(const FadingDistribution& main, int K,
                            const FadingDistribution& eve, double P_avg,
                            const BoundSettings& settings = {});

/// Distribution of the transmitted cell index when every receiver quantizes
/// its own independent gain with `quant` and the transmitter picks the
/// minimum or maximum index.
std::vector<double> selection_probabilities(const Quantizer& quant,
                                            const std::vector<FadingDistribution>& mains,
                                            Selection rule);

/// Long-run secrecy rate of the quantized scheme with fixed (tau, P) shared by
/// all receivers: sum_q Pr[selected = q] E_e[{ln((1 + tau_q P_q) / (1 + gamma_e P_q))}^+].
double scheme_secrecy_rate(const Quantizer& quant, const PowerPolicy& policy,
                           const std::vector<FadingDistribution>& mains,
                           const FadingDistribution& eve, Selection rule,
                           const QuadratureSettings& qs = {});

/// Average transmit power of the same scheme.
double scheme_average_power(const Quantizer& quant, const PowerPolicy& policy,
                            const std::vector<FadingDistribution>& mains, Selection rule);

}  // namespace wiretap
