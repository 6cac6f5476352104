#include "wiretap/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <sstream>

#include "wiretap/error.hpp"

namespace wiretap {

std::string to_string(Scenario s) { return s == Scenario::Common ? "common" : "sum"; }

std::string to_string(ThresholdMode m) {
  return m == ThresholdMode::Optimized ? "optimized" : "equiprobable";
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw UsageError("invalid value '" + text + "' for " + key);
  }
  return v;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& value) {
  std::vector<T> out;
  for (const auto& item : split_list(value)) out.push_back(parse_number<T>(key, item));
  if (out.empty()) throw UsageError(key + " list is empty");
  return out;
}

}  // namespace

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "snr_db") {
    cfg.snr_db = parse_list<double>(key, value);
  } else if (key == "bits") {
    cfg.bits = parse_list<int>(key, value);
  } else if (key == "receivers") {
    cfg.receivers = parse_list<int>(key, value);
  } else if (key == "scenario") {
    if (value == "common") {
      cfg.scenario = Scenario::Common;
    } else if (value == "sum") {
      cfg.scenario = Scenario::Sum;
    } else {
      throw UsageError("scenario must be 'common' or 'sum', got '" + value + "'");
    }
  } else if (key == "thresholds") {
    if (value == "optimized") {
      cfg.thresholds = ThresholdMode::Optimized;
    } else if (value == "equiprobable") {
      cfg.thresholds = ThresholdMode::Equiprobable;
    } else {
      throw UsageError("thresholds must be 'optimized' or 'equiprobable', got '" + value + "'");
    }
  } else if (key == "main_means") {
    cfg.main_means = parse_list<double>(key, value);
  } else if (key == "eve_mean") {
    cfg.eve_mean = parse_number<double>(key, value);
  } else if (key == "bounds") {
    cfg.lower = cfg.upper = cfg.perfect = false;
    for (const auto& item : split_list(value)) {
      if (item == "lower") {
        cfg.lower = true;
      } else if (item == "upper") {
        cfg.upper = true;
      } else if (item == "perfect") {
        cfg.perfect = true;
      } else {
        throw UsageError("unknown bound '" + item + "' (expected lower, upper, perfect)");
      }
    }
  } else if (key == "blocks") {
    cfg.blocks = parse_number<std::uint64_t>(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "workers") {
    cfg.workers = parse_number<int>(key, value);
  } else if (key == "out") {
    cfg.out = value;
  } else if (key == "quantizer") {
    cfg.quantizer = parse_list<double>(key, value);
  } else if (key == "powers") {
    cfg.powers = parse_list<double>(key, value);
  } else {
    throw UsageError("unknown key '" + key + "'");
  }
}

void parse_config(std::istream& in, const std::string& source, RunConfig& cfg) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(number) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw UsageError(where + "missing key before '='");
    try {
      apply_setting(cfg, key, line.substr(eq + 1));
    } catch (const UsageError& e) {
      throw UsageError(where + e.what());
    }
  }
}

void RunConfig::validate() const {
  if (snr_db.empty()) throw UsageError("snr_db list is empty");
  if (bits.empty()) throw UsageError("bits list is empty");
  if (receivers.empty()) throw UsageError("receivers list is empty");
  if (main_means.empty()) throw UsageError("main_means list is empty");
  for (double s : snr_db) {
    if (!std::isfinite(s)) throw UsageError("snr_db values must be finite");
  }
  for (int b : bits) {
    if (b < 1 || b > 12) throw UsageError("bits must lie in 1..12");
  }
  for (int K : receivers) {
    if (K < 1) throw UsageError("receivers must be >= 1");
    if (main_means.size() != 1 && main_means.size() != static_cast<std::size_t>(K)) {
      throw UsageError("main_means needs one value or one per receiver (K = " +
                       std::to_string(K) + ")");
    }
  }
  for (double m : main_means) {
    if (!(m > 0.0) || !std::isfinite(m)) throw UsageError("main_means must be positive");
  }
  if (scenario == Scenario::Sum &&
      std::adjacent_find(main_means.begin(), main_means.end(), std::not_equal_to<>()) !=
          main_means.end()) {
    throw UsageError("the sum scenario needs identically distributed receivers");
  }
  if (!(eve_mean > 0.0) || !std::isfinite(eve_mean)) throw UsageError("eve_mean must be positive");
  if (!lower && !upper && !perfect) throw UsageError("bounds selects nothing");
  if (blocks == 0) throw UsageError("blocks must be >= 1");
  if (workers < 1) throw UsageError("workers must be >= 1");
  if (quantizer.empty() != powers.empty()) {
    throw UsageError("quantizer and powers must be given together");
  }
  if (!quantizer.empty() && powers.size() != quantizer.size() + 1) {
    throw UsageError("powers needs one value per cell (" + std::to_string(quantizer.size() + 1) +
                     ")");
  }
  for (double p : powers) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw UsageError("powers must be non-negative");
  }
}

std::vector<FadingDistribution> RunConfig::mains(int K) const {
  std::vector<FadingDistribution> out;
  for (int k = 0; k < K; ++k) {
    const double m = main_means.size() == 1 ? main_means.front() : main_means[static_cast<std::size_t>(k)];
    out.push_back(FadingDistribution::exponential(m));
  }
  return out;
}

FadingDistribution RunConfig::eve() const { return FadingDistribution::exponential(eve_mean); }

std::string format_scheme(const Quantizer& quant, const PowerPolicy& policy) {
  auto join = [](auto&& values) {
    std::string out;
    char buf[32];
    for (double v : values) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      if (!out.empty()) out += ", ";
      out += buf;
    }
    return out;
  };
  return "quantizer = " + join(quant.thresholds()) + "\npowers = " + join(policy.powers) + "\n";
}

double snr_to_power(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

}  // namespace wiretap
