#include "wiretap/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wiretap/error.hpp"
#include "wiretap/rates.hpp"

namespace wiretap {

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::CommonLower: return "common_lower";
    case BoundKind::CommonUpper: return "common_upper";
    case BoundKind::SumLower: return "sum_lower";
    case BoundKind::SumUpper: return "sum_upper";
    case BoundKind::CommonPerfectCsi: return "common_perfect_csi";
    case BoundKind::SumPerfectCsi: return "sum_perfect_csi";
  }
  return "unknown";
}

namespace {

void check_budget(double P_avg) {
  if (!(P_avg > 0.0) || !std::isfinite(P_avg)) {
    throw DomainError("average power budget must be positive and finite");
  }
}

void check_receivers(const std::vector<FadingDistribution>& mains) {
  if (mains.empty()) throw DomainError("at least one legitimate receiver is required");
}

ReceiverBound solve_receiver(const FadingDistribution& main, const FadingDistribution& eve,
                             int bits, double P_avg, BoundMode mode,
                             const BoundSettings& settings,
                             const std::optional<Quantizer>& warm) {
  ReceiverBound out;
  if (settings.thresholds == ThresholdMode::Equiprobable) {
    const Quantizer quant = equiprobable_quantizer(main, bits);
    const auto theta = cell_probabilities(quant, main);
    const auto r = optimize_powers(quant, theta, eve, P_avg, mode, main, settings.optimizer);
    out.value = r.value;
    out.quantizer = quant;
    out.policy = r.policy;
    out.multiplier = r.multiplier;
    return out;
  }
  std::optional<Quantizer> usable;
  if (warm && warm->bits() <= bits) usable = warm;
  const auto r = optimize_thresholds_and_powers(main, eve, bits, P_avg, mode,
                                                settings.optimizer, usable);
  out.value = r.value;
  out.quantizer = r.quantizer;
  out.policy = r.policy;
  out.multiplier = r.multiplier;
  out.rounds = r.rounds;
  const auto [lo, hi] = std::minmax_element(r.final_values.begin(), r.final_values.end());
  out.gap = r.final_values.empty() ? 0.0 : *hi - *lo;
  return out;
}

std::optional<Quantizer> warm_for(const BoundResult* warm_start, std::size_t index) {
  if (!warm_start || index >= warm_start->receivers.size()) return std::nullopt;
  return warm_start->receivers[index].quantizer;
}

// Solves each distinct receiver once and takes the minimum; ties go to the
// lowest index.
template <typename Solve>
BoundResult min_over_receivers(const std::vector<FadingDistribution>& mains, BoundKind kind,
                               Solve solve) {
  BoundResult out;
  out.kind = kind;
  out.receivers.resize(mains.size());
  std::vector<std::size_t> source(mains.size());
  for (std::size_t k = 0; k < mains.size(); ++k) {
    source[k] = k;
    for (std::size_t j = 0; j < k; ++j) {
      if (mains[j] == mains[k]) {
        source[k] = source[j];
        break;
      }
    }
    if (source[k] == k) {
      out.receivers[k] = solve(k);
    } else {
      out.receivers[k] = out.receivers[source[k]];
    }
    out.receivers[k].receiver = k;
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < mains.size(); ++k) {
    if (out.receivers[k].value < out.receivers[best].value) best = k;
  }
  const ReceiverBound& r = out.receivers[best];
  out.value = r.value;
  out.quantizer = r.quantizer;
  out.policy = r.policy;
  out.bottleneck_receiver = best;
  return out;
}

void finite_b_diagnostics(BoundResult& out) {
  double rounds = 0.0, spread = 0.0;
  for (const auto& r : out.receivers) {
    rounds = std::max(rounds, static_cast<double>(r.rounds));
    spread = std::max(spread, r.gap);
  }
  const ReceiverBound& main = out.receivers[out.bottleneck_receiver.value_or(0)];
  out.diagnostics["rounds"] = rounds;
  out.diagnostics["gap"] = spread;
  out.diagnostics["multiplier"] = main.multiplier;
}

BoundResult common_bound(const std::vector<FadingDistribution>& mains,
                         const FadingDistribution& eve, int bits, double P_avg,
                         const BoundSettings& settings, const BoundResult* warm_start,
                         BoundMode mode) {
  check_receivers(mains);
  check_budget(P_avg);
  const BoundKind kind =
      mode == BoundMode::LowerBound ? BoundKind::CommonLower : BoundKind::CommonUpper;
  BoundResult out = min_over_receivers(mains, kind, [&](std::size_t k) {
    return solve_receiver(mains[k], eve, bits, P_avg, mode, settings, warm_for(warm_start, k));
  });
  out.bits = bits;
  out.avg_power_budget = P_avg;
  finite_b_diagnostics(out);
  return out;
}

BoundResult sum_bound(const FadingDistribution& main, int K, const FadingDistribution& eve,
                      int bits, double P_avg, const BoundSettings& settings,
                      const BoundResult* warm_start, BoundMode mode) {
  check_budget(P_avg);
  const FadingDistribution strongest = max_order_statistic(main, K);
  BoundResult out;
  out.kind = mode == BoundMode::LowerBound ? BoundKind::SumLower : BoundKind::SumUpper;
  out.bits = bits;
  out.avg_power_budget = P_avg;
  out.receivers.push_back(
      solve_receiver(strongest, eve, bits, P_avg, mode, settings, warm_for(warm_start, 0)));
  out.value = out.receivers[0].value;
  out.quantizer = out.receivers[0].quantizer;
  out.policy = out.receivers[0].policy;
  finite_b_diagnostics(out);
  out.diagnostics["receivers"] = K;
  return out;
}

const FadingDistribution& common_distribution(const std::vector<FadingDistribution>& mains) {
  check_receivers(mains);
  for (const auto& d : mains) {
    if (!(d == mains.front())) {
      throw UnsupportedError(
          "sum-rate bounds need identically distributed receivers; got " + d.describe() +
          " and " + mains.front().describe());
    }
  }
  return mains.front();
}

ReceiverBound solve_perfect(const FadingDistribution& main, const FadingDistribution& eve,
                            double P_avg, const BoundSettings& settings) {
  const CsiPowerProfile prof =
      perfect_csi_power_policy(main, eve, P_avg, settings.csi_grid, settings.optimizer);
  ReceiverBound out;
  const CsiCapacity cap = perfect_csi_capacity(main, eve, P_avg, prof.lagrange_multiplier,
                                               settings.optimizer.quadrature);
  out.multiplier = cap.multiplier;
  out.value = cap.value;
  // Grid average of the primal objective: a coarse lower estimate.
  double grid_value = 0.0;
  for (std::size_t i = 0; i < prof.grid.size(); ++i) {
    grid_value += expected_secrecy_gain(prof.grid[i], prof.powers[i], eve,
                                        settings.optimizer.quadrature);
  }
  grid_value /= static_cast<double>(prof.grid.size());
  out.gap = out.value - grid_value;
  out.policy = prof;
  return out;
}

void perfect_diagnostics(BoundResult& out) {
  const ReceiverBound& main = out.receivers[out.bottleneck_receiver.value_or(0)];
  out.diagnostics["multiplier"] = main.multiplier;
  out.diagnostics["gap"] = main.gap;
}

}  // namespace

BoundResult common_message_lower(const std::vector<FadingDistribution>& mains,
                                 const FadingDistribution& eve, int bits, double P_avg,
                                 const BoundSettings& settings,
                                 const BoundResult* warm_start) {
  return common_bound(mains, eve, bits, P_avg, settings, warm_start, BoundMode::LowerBound);
}

BoundResult common_message_upper(const std::vector<FadingDistribution>& mains,
                                 const FadingDistribution& eve, int bits, double P_avg,
                                 const BoundSettings& settings,
                                 const BoundResult* warm_start) {
  return common_bound(mains, eve, bits, P_avg, settings, warm_start, BoundMode::UpperBound);
}

BoundResult sum_rate_lower(const FadingDistribution& main, int K,
                           const FadingDistribution& eve, int bits, double P_avg,
                           const BoundSettings& settings, const BoundResult* warm_start) {
  return sum_bound(main, K, eve, bits, P_avg, settings, warm_start, BoundMode::LowerBound);
}

BoundResult sum_rate_upper(const FadingDistribution& main, int K,
                           const FadingDistribution& eve, int bits, double P_avg,
                           const BoundSettings& settings, const BoundResult* warm_start) {
  return sum_bound(main, K, eve, bits, P_avg, settings, warm_start, BoundMode::UpperBound);
}

BoundResult sum_rate_lower(const std::vector<FadingDistribution>& mains,
                           const FadingDistribution& eve, int bits, double P_avg,
                           const BoundSettings& settings, const BoundResult* warm_start) {
  return sum_rate_lower(common_distribution(mains), static_cast<int>(mains.size()), eve,
                        bits, P_avg, settings, warm_start);
}

BoundResult sum_rate_upper(const std::vector<FadingDistribution>& mains,
                           const FadingDistribution& eve, int bits, double P_avg,
                           const BoundSettings& settings, const BoundResult* warm_start) {
  return sum_rate_upper(common_distribution(mains), static_cast<int>(mains.size()), eve,
                        bits, P_avg, settings, warm_start);
}

BoundResult perfect_csi_common(const std::vector<FadingDistribution>& mains,
                               const FadingDistribution& eve, double P_avg,
                               const BoundSettings& settings) {
  check_receivers(mains);
  check_budget(P_avg);
  BoundResult out = min_over_receivers(mains, BoundKind::CommonPerfectCsi, [&](std::size_t k) {
    return solve_perfect(mains[k], eve, P_avg, settings);
  });
  out.avg_power_budget = P_avg;
  perfect_diagnostics(out);
  return out;
}

BoundResult perfect_csi_sum(const FadingDistribution& main, int K,
                            const FadingDistribution& eve, double P_avg,
                            const BoundSettings& settings) {
  check_budget(P_avg);
  const FadingDistribution strongest = max_order_statistic(main, K);
  BoundResult out;
  out.kind = BoundKind::SumPerfectCsi;
  out.avg_power_budget = P_avg;
  out.receivers.push_back(solve_perfect(strongest, eve, P_avg, settings));
  out.value = out.receivers[0].value;
  out.policy = out.receivers[0].policy;
  perfect_diagnostics(out);
  out.diagnostics["receivers"] = K;
  return out;
}

std::vector<double> selection_probabilities(const Quantizer& quant,
                                            const std::vector<FadingDistribution>& mains,
                                            Selection rule) {
  check_receivers(mains);
  const std::size_t n = quant.cells();
  std::vector<double> out(n, 0.0);
  if (rule == Selection::Min) {
    // above[q] = Pr[every index >= q] = prod_k S_k(tau_q).
    std::vector<double> above(n + 1, 0.0);
    above[0] = 1.0;
    for (std::size_t q = 1; q < n; ++q) {
      double p = 1.0;
      for (const auto& d : mains) p *= d.survival(quant.lower(q));
      above[q] = p;
    }
    for (std::size_t q = 0; q < n; ++q) out[q] = above[q] - above[q + 1];
  } else {
    // below[q] = Pr[every index <= q] = prod_k F_k(tau_{q+1}).
    std::vector<double> below(n, 1.0);
    for (std::size_t q = 0; q + 1 < n; ++q) {
      double p = 1.0;
      for (const auto& d : mains) p *= d.cdf(quant.upper(q));
      below[q] = p;
    }
    for (std::size_t q = 0; q < n; ++q) out[q] = below[q] - (q == 0 ? 0.0 : below[q - 1]);
    // 1 - prod_k (1 - S_k) without cancellation for a light top cell.
    double log_below = 0.0;
    for (const auto& d : mains) log_below += std::log1p(-d.survival(quant.lower(n - 1)));
    out[n - 1] = -std::expm1(log_below);
  }
  return out;
}

double scheme_secrecy_rate(const Quantizer& quant, const PowerPolicy& policy,
                           const std::vector<FadingDistribution>& mains,
                           const FadingDistribution& eve, Selection rule,
                           const QuadratureSettings& qs) {
  if (policy.powers.size() != quant.cells()) {
    throw DomainError("power policy does not match the quantizer");
  }
  const auto occupancy = selection_probabilities(quant, mains, rule);
  double total = 0.0;
  for (std::size_t q = 1; q < quant.cells(); ++q) {
    if (occupancy[q] > 0.0 && policy.powers[q] > 0.0) {
      total += occupancy[q] * expected_secrecy_gain(quant.lower(q), policy.powers[q], eve, qs);
    }
  }
  return total;
}

double scheme_average_power(const Quantizer& quant, const PowerPolicy& policy,
                            const std::vector<FadingDistribution>& mains, Selection rule) {
  if (policy.powers.size() != quant.cells()) {
    throw DomainError("power policy does not match the quantizer");
  }
  return policy.average_power(selection_probabilities(quant, mains, rule));
}

namespace {

nlohmann::json policy_json(const std::variant<PowerPolicy, CsiPowerProfile>& policy) {
  if (const auto* p = std::get_if<PowerPolicy>(&policy)) {
    return {{"powers", p->powers}, {"avg_power_budget", p->avg_power_budget}};
  }
  const auto& c = std::get<CsiPowerProfile>(policy);
  return {{"grid", c.grid},
          {"powers", c.powers},
          {"lagrange_multiplier", c.lagrange_multiplier},
          {"avg_power_budget", c.avg_power_budget}};
}

}  // namespace

nlohmann::json BoundResult::to_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind);
  j["value_npcu"] = value;
  j["bits"] = bits ? nlohmann::json(*bits) : nlohmann::json(nullptr);
  j["avg_power_budget"] = avg_power_budget;
  if (quantizer) {
    j["thresholds"] = std::vector<double>(quantizer->thresholds().begin(),
                                          quantizer->thresholds().end());
  } else {
    j["thresholds"] = nullptr;
  }
  j["policy"] = policy_json(policy);
  j["bottleneck_receiver"] =
      bottleneck_receiver ? nlohmann::json(*bottleneck_receiver) : nlohmann::json(nullptr);
  j["diagnostics"] = diagnostics;
  nlohmann::json per = nlohmann::json::array();
  for (const auto& r : receivers) per.push_back({{"receiver", r.receiver}, {"value_npcu", r.value}});
  j["receivers"] = per;
  return j;
}

}  // namespace wiretap
