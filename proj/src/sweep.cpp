#include "wiretap/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <ostream>
#include <thread>
#include <tuple>

#include "wiretap/error.hpp"
#include "wiretap/sim.hpp"

namespace wiretap {

namespace {

struct Point {
  double snr_db;
  int K;
};

BoundSettings bound_settings(const RunConfig& cfg) {
  BoundSettings s;
  s.thresholds = cfg.thresholds;
  s.optimizer.seed = cfg.seed;
  return s;
}

SweepRow make_row(const RunConfig& cfg, const Point& p, int b, const std::string& mode,
                  const BoundResult& r) {
  SweepRow row;
  row.scenario = cfg.scenario;
  row.K = p.K;
  row.b = b;
  row.mode = mode;
  row.snr_db = p.snr_db;
  row.kind = r.kind;
  row.value = r.value;
  const auto rounds = r.diagnostics.find("rounds");
  row.diag_iters = rounds == r.diagnostics.end() ? 0.0 : rounds->second;
  const auto gap = r.diagnostics.find("gap");
  row.diag_gap = gap == r.diagnostics.end() ? 0.0 : gap->second;
  return row;
}

std::vector<SweepRow> evaluate_point(const RunConfig& cfg, const Point& p) {
  const auto mains = cfg.mains(p.K);
  const auto eve = cfg.eve();
  const double P_avg = snr_to_power(p.snr_db);
  const BoundSettings settings = bound_settings(cfg);
  const bool common = cfg.scenario == Scenario::Common;
  const std::string mode = to_string(cfg.thresholds);

  std::vector<int> bits = cfg.bits;
  std::sort(bits.begin(), bits.end());
  bits.erase(std::unique(bits.begin(), bits.end()), bits.end());

  std::vector<SweepRow> rows;
  std::optional<BoundResult> prev_lower, prev_upper;
  for (int b : bits) {
    if (cfg.lower) {
      const BoundResult* warm = prev_lower ? &*prev_lower : nullptr;
      BoundResult r = common ? common_message_lower(mains, eve, b, P_avg, settings, warm)
                             : sum_rate_lower(mains, eve, b, P_avg, settings, warm);
      rows.push_back(make_row(cfg, p, b, mode, r));
      prev_lower = std::move(r);
    }
    if (cfg.upper) {
      const BoundResult* warm = prev_upper ? &*prev_upper : nullptr;
      BoundResult r = common ? common_message_upper(mains, eve, b, P_avg, settings, warm)
                             : sum_rate_upper(mains, eve, b, P_avg, settings, warm);
      rows.push_back(make_row(cfg, p, b, mode, r));
      prev_upper = std::move(r);
    }
  }
  if (cfg.perfect) {
    const BoundResult r = common ? perfect_csi_common(mains, eve, P_avg, settings)
                                 : perfect_csi_sum(mains.front(), p.K, eve, P_avg, settings);
    rows.push_back(make_row(cfg, p, 0, "perfect", r));
  }
  return rows;
}

std::string format_number(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace

std::vector<SweepRow> run_sweep(const RunConfig& cfg) {
  cfg.validate();
  std::vector<Point> points;
  for (int K : cfg.receivers) {
    for (double snr : cfg.snr_db) points.push_back({snr, K});
  }

  std::vector<std::vector<SweepRow>> results(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        results[i] = evaluate_point(cfg, points[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::min<int>(cfg.workers, static_cast<int>(points.size()));
  if (n <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<SweepRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  auto key = [](const SweepRow& r) {
    return std::make_tuple(r.K, r.mode == "perfect", r.b, r.snr_db, static_cast<int>(r.kind));
  };
  std::sort(rows.begin(), rows.end(),
            [&](const SweepRow& a, const SweepRow& b) { return key(a) < key(b); });
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "scenario,K,b,mode,snr_db,bound_kind,value_npcu,diag_iters,diag_gap\n";
  for (const auto& r : rows) {
    out << to_string(r.scenario) << ',' << r.K << ',' << r.b << ',' << r.mode << ','
        << format_number(r.snr_db, 12) << ',' << to_string(r.kind) << ','
        << format_number(r.value, 17) << ',' << format_number(r.diag_iters, 12) << ','
        << format_number(r.diag_gap, 17) << '\n';
  }
}

namespace {

void require_single_point(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.snr_db.size() != 1 || cfg.bits.size() != 1 || cfg.receivers.size() != 1) {
    throw UsageError("this command needs exactly one snr_db, bits and receivers value");
  }
}

}  // namespace

std::vector<BoundResult> bounds_at(const RunConfig& cfg) {
  require_single_point(cfg);
  const int K = cfg.receivers.front();
  const int b = cfg.bits.front();
  const auto mains = cfg.mains(K);
  const auto eve = cfg.eve();
  const double P_avg = snr_to_power(cfg.snr_db.front());
  const BoundSettings settings = bound_settings(cfg);
  const bool common = cfg.scenario == Scenario::Common;
  std::vector<BoundResult> out;
  if (cfg.lower) {
    out.push_back(common ? common_message_lower(mains, eve, b, P_avg, settings)
                         : sum_rate_lower(mains, eve, b, P_avg, settings));
  }
  if (cfg.upper) {
    out.push_back(common ? common_message_upper(mains, eve, b, P_avg, settings)
                         : sum_rate_upper(mains, eve, b, P_avg, settings));
  }
  if (cfg.perfect) {
    out.push_back(common ? perfect_csi_common(mains, eve, P_avg, settings)
                         : perfect_csi_sum(mains.front(), K, eve, P_avg, settings));
  }
  return out;
}

BoundResult lower_bound_at(const RunConfig& cfg) {
  require_single_point(cfg);
  const int K = cfg.receivers.front();
  const auto mains = cfg.mains(K);
  const double P_avg = snr_to_power(cfg.snr_db.front());
  const BoundSettings settings = bound_settings(cfg);
  if (cfg.scenario == Scenario::Common) {
    return common_message_lower(mains, cfg.eve(), cfg.bits.front(), P_avg, settings);
  }
  return sum_rate_lower(mains, cfg.eve(), cfg.bits.front(), P_avg, settings);
}

ValidateReport run_validate(const RunConfig& cfg, const ValidateOptions& options) {
  if (!(options.threshold_scale > 0.0) || !std::isfinite(options.threshold_scale)) {
    throw UsageError("threshold scale must be positive");
  }
  const BoundResult bound = lower_bound_at(cfg);
  const Quantizer& quant = *bound.quantizer;
  PowerPolicy policy = std::get<PowerPolicy>(bound.policy);
  if (options.zero_power) std::fill(policy.powers.begin(), policy.powers.end(), 0.0);

  const int K = cfg.receivers.front();
  const auto mains = cfg.mains(K);
  const Selection rule = cfg.scenario == Scenario::Common ? Selection::Min : Selection::Max;

  ValidateReport report;
  report.analytic = scheme_secrecy_rate(quant, policy, mains, cfg.eve(), rule);

  std::vector<double> scaled(quant.thresholds().begin(), quant.thresholds().end());
  for (double& t : scaled) t *= options.threshold_scale;
  const SimConfig sim{.blocks = cfg.blocks,
                      .seed = cfg.seed,
                      .mains = mains,
                      .eve = cfg.eve(),
                      .quantizer = Quantizer(std::move(scaled)),
                      .policy = policy,
                      .workers = cfg.workers,
                      .keep_trace = false};
  const SimResult r = simulate(sim, rule);
  report.estimate = r.rate_estimate;
  report.std_error = r.std_error;
  report.mean_power = r.mean_power;
  report.pass = std::abs(r.rate_estimate - report.analytic) <= 3.0 * r.std_error;
  return report;
}

}  // namespace wiretap
