#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include "json.hpp"

#include "wiretap/config.hpp"
#include "wiretap/error.hpp"
#include "wiretap/sim.hpp"
#include "wiretap/sweep.hpp"

namespace {

using wiretap::RunConfig;
using wiretap::UsageError;

constexpr int kUsageExit = 1;
constexpr int kValidationExit = 2;

// Flag name -> config key. Flags are applied after the config file.
const std::map<std::string, std::string> kFlagKeys{
    {"snr-db", "snr_db"},       {"bits", "bits"},         {"receivers", "receivers"},
    {"scenario", "scenario"},   {"thresholds", "thresholds"}, {"blocks", "blocks"},
    {"seed", "seed"},           {"out", "out"},           {"main-means", "main_means"},
    {"eve-mean", "eve_mean"},   {"workers", "workers"},   {"bounds", "bounds"},
};

struct Shared {
  std::string config_path;
  std::map<std::string, std::string> flags;
};

void add_shared_options(CLI::App* cmd, Shared& shared) {
  cmd->add_option("--config", shared.config_path, "key = value configuration file");
  for (const auto& [flag, key] : kFlagKeys) {
    cmd->add_option("--" + flag, shared.flags[flag], "overrides '" + key + "'");
  }
}

RunConfig load_config(const CLI::App* cmd, const Shared& shared) {
  RunConfig cfg;
  if (!shared.config_path.empty()) {
    std::ifstream in(shared.config_path);
    if (!in) throw UsageError("cannot open config file '" + shared.config_path + "'");
    wiretap::parse_config(in, shared.config_path, cfg);
  }
  for (const auto& [flag, key] : kFlagKeys) {
    if (cmd->count("--" + flag) > 0) {
      try {
        wiretap::apply_setting(cfg, key, shared.flags.at(flag));
      } catch (const UsageError& e) {
        throw UsageError("--" + flag + ": " + e.what());
      }
    }
  }
  cfg.validate();
  return cfg;
}

// Writes through `emit` to cfg.out, or to stdout when no path is set.
void write_output(const std::string& path, const std::function<void(std::ostream&)>& emit) {
  if (path.empty()) {
    emit(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open output file '" + path + "'");
  emit(out);
}

int cmd_bounds(const RunConfig& cfg) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : wiretap::bounds_at(cfg)) j.push_back(r.to_json());
  write_output(cfg.out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  return 0;
}

int cmd_sweep(const RunConfig& cfg) {
  const auto rows = wiretap::run_sweep(cfg);
  write_output(cfg.out, [&](std::ostream& os) { wiretap::write_sweep_csv(os, rows); });
  return 0;
}

int cmd_optimize(const RunConfig& cfg, const std::string& format) {
  const auto r = wiretap::lower_bound_at(cfg);
  const auto& policy = std::get<wiretap::PowerPolicy>(r.policy);
  write_output(cfg.out, [&](std::ostream& os) {
    if (format == "config") {
      os << wiretap::format_scheme(*r.quantizer, policy);
    } else {
      os << r.to_json().dump(2) << '\n';
    }
  });
  return 0;
}

int cmd_simulate(const RunConfig& cfg) {
  if (cfg.receivers.size() != 1 || cfg.snr_db.size() != 1) {
    throw UsageError("simulate needs exactly one snr_db and receivers value");
  }
  const int K = cfg.receivers.front();
  const double P_avg = wiretap::snr_to_power(cfg.snr_db.front());
  std::optional<wiretap::Quantizer> quant;
  wiretap::PowerPolicy policy;
  if (!cfg.quantizer.empty()) {
    quant.emplace(cfg.quantizer);
    policy = wiretap::PowerPolicy{cfg.powers, P_avg};
  } else {
    const auto r = wiretap::lower_bound_at(cfg);
    quant = r.quantizer;
    policy = std::get<wiretap::PowerPolicy>(r.policy);
  }
  const auto rule = cfg.scenario == wiretap::Scenario::Common ? wiretap::Selection::Min
                                                              : wiretap::Selection::Max;
  const wiretap::SimConfig sim{.blocks = cfg.blocks,
                               .seed = cfg.seed,
                               .mains = cfg.mains(K),
                               .eve = cfg.eve(),
                               .quantizer = *quant,
                               .policy = policy,
                               .workers = cfg.workers,
                               .keep_trace = !cfg.out.empty()};
  const auto r = wiretap::simulate(sim, rule);
  if (!cfg.out.empty()) {
    write_output(cfg.out, [&](std::ostream& os) { wiretap::write_trace_csv(os, r.trace); });
  }
  const double analytic =
      wiretap::scheme_secrecy_rate(*quant, policy, sim.mains, sim.eve, rule);
  std::printf("rate_estimate %.17g\nstd_error %.17g\nanalytic %.17g\nmean_power %.17g\n"
              "power_std_error %.17g\n",
              r.rate_estimate, r.std_error, analytic, r.mean_power, r.power_std_error);
  return 0;
}

int cmd_validate(const RunConfig& cfg, bool zero_power, bool perturb) {
  wiretap::ValidateOptions options;
  options.zero_power = zero_power;
  if (perturb) options.threshold_scale = 2.0;
  const auto report = wiretap::run_validate(cfg, options);
  std::printf("analytic %.17g\nestimate %.17g\nstd_error %.17g\nmean_power %.17g\n%s\n",
              report.analytic, report.estimate, report.std_error, report.mean_power,
              report.pass ? "PASS" : "FAIL");
  return report.pass ? 0 : kValidationExit;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secrecy capacity bounds for fading broadcast wiretap channels with quantized "
               "feedback"};
  app.require_subcommand(1);

  Shared shared;
  auto* bounds = app.add_subcommand("bounds", "all selected bounds at one operating point (JSON)");
  auto* sweep = app.add_subcommand("sweep", "bounds over snr x bits x receivers (CSV)");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo run of the quantized scheme");
  auto* validate = app.add_subcommand("validate", "simulation against the analytic rate at 3 sigma");
  auto* optimize = app.add_subcommand("optimize", "optimized thresholds and powers");
  for (auto* cmd : {bounds, sweep, simulate, validate, optimize}) add_shared_options(cmd, shared);

  bool zero_power = false;
  bool perturb = false;
  validate->add_flag("--zero-power", zero_power, "replace the optimized powers by zeros");
  validate->add_flag("--perturb-thresholds", perturb,
                     "simulate with thresholds doubled (negative control)");
  std::string format = "json";
  optimize->add_option("--format", format, "json or config")
      ->check(CLI::IsMember({"json", "config"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageExit;
  }

  try {
    if (*bounds) return cmd_bounds(load_config(bounds, shared));
    if (*sweep) return cmd_sweep(load_config(sweep, shared));
    if (*simulate) return cmd_simulate(load_config(simulate, shared));
    if (*validate) return cmd_validate(load_config(validate, shared), zero_power, perturb);
    if (*optimize) return cmd_optimize(load_config(optimize, shared), format);
  } catch (const wiretap::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageExit;
  }
  return 0;
}
