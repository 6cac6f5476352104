#include "wiretap/sim.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <cstdio>
#include <exception>
#include <ostream>
#include <thread>

#include "wiretap/error.hpp"
#include "wiretap/random.hpp"

namespace wiretap {

void SimConfig::validate() const {
  if (blocks == 0) throw DomainError("simulation needs at least one block");
  if (mains.empty()) throw DomainError("simulation needs at least one receiver");
  if (policy.powers.size() != quantizer.cells()) {
    throw DomainError("power policy does not match the quantizer");
  }
  for (double p : policy.powers) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw DomainError("powers must be finite and >= 0");
  }
  if (workers < 1) throw DomainError("workers must be >= 1");
}

namespace {

// Blocks are reduced in fixed chunks so sums do not depend on the worker count.
constexpr std::uint64_t kChunk = 1 << 16;

struct ChunkSums {
  double rate = 0.0, rate_sq = 0.0, power = 0.0, power_sq = 0.0;
};

double codeword_rate(const Quantizer& quant, const PowerPolicy& policy, std::size_t q) {
  if (q == 0) return 0.0;
  return std::log1p(quant.lower(q) * policy.powers[q]);
}

double increment_for(double rate, double eve_gain, double P) {
  if (P == 0.0) return 0.0;
  return std::max(0.0, rate - std::log1p(eve_gain * P));
}

struct Moments {
  double mean = 0.0, std_error = 0.0;
};

Moments moments(double sum, double sum_sq, std::uint64_t n) {
  Moments m;
  const double N = static_cast<double>(n);
  m.mean = sum / N;
  if (n > 1) {
    const double var = std::max(0.0, (sum_sq - N * m.mean * m.mean) / (N - 1.0));
    m.std_error = std::sqrt(var / N);
  }
  return m;
}

template <typename Body>
void for_each_chunk(std::uint64_t blocks, int workers, Body body) {
  const std::uint64_t chunks = (blocks + kChunk - 1) / kChunk;
  const int n = static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(workers), chunks));
  if (n <= 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) body(c);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::vector<std::thread> pool;
  for (int w = 0; w < n; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::uint64_t c = static_cast<std::uint64_t>(w); c < chunks;
             c += static_cast<std::uint64_t>(n)) {
          body(c);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

SimResult simulate(const SimConfig& cfg, Selection rule) {
  cfg.validate();
  const int K = cfg.receivers();
  const std::uint64_t L = cfg.blocks;
  const std::uint64_t eve_terminal = static_cast<std::uint64_t>(K);
  const std::uint64_t tie_terminal = eve_terminal + 1;

  SimResult out;
  BlockFadingTrace& tr = out.trace;
  tr.K = K;
  if (cfg.keep_trace) {
    tr.gains.resize(L * static_cast<std::uint64_t>(K));
    tr.eve_gain.resize(L);
    tr.feedback.resize(L * static_cast<std::uint64_t>(K));
    tr.selected.resize(L);
    tr.receiver.resize(L);
    tr.power.resize(L);
    tr.rate.resize(L);
    tr.increment.resize(L);
  }

  const std::uint64_t chunks = (L + kChunk - 1) / kChunk;
  std::vector<ChunkSums> sums(chunks);
  for_each_chunk(L, cfg.workers, [&](std::uint64_t c) {
    const std::uint64_t first = c * kChunk, last = std::min(L, first + kChunk);
    std::vector<double> g(static_cast<std::size_t>(K));
    std::vector<std::uint32_t> fb(static_cast<std::size_t>(K));
    ChunkSums s;
    for (std::uint64_t l = first; l < last; ++l) {
      for (int k = 0; k < K; ++k) {
        RandomStream rs(cfg.seed, l, static_cast<std::uint64_t>(k));
        g[k] = cfg.mains[k].sample(rs);
        fb[k] = static_cast<std::uint32_t>(cfg.quantizer.index_of(g[k]));
      }
      RandomStream es(cfg.seed, l, eve_terminal);
      const double ge = cfg.eve.sample(es);

      std::uint32_t q = fb[0], who = 0;
      if (rule == Selection::Min) {
        for (int k = 1; k < K; ++k) {
          if (fb[k] < q) q = fb[k], who = static_cast<std::uint32_t>(k);
        }
      } else {
        for (int k = 1; k < K; ++k) q = std::max(q, fb[k]);
        std::uint32_t ties = 0;
        for (int k = 0; k < K; ++k) ties += fb[k] == q ? 1u : 0u;
        std::uint32_t pick = 0;
        if (ties > 1) {
          RandomStream ts(cfg.seed, l, tie_terminal);
          pick = std::min(ties - 1, static_cast<std::uint32_t>(ts.next_uniform() * ties));
        }
        for (int k = 0; k < K; ++k) {
          if (fb[k] != q) continue;
          if (pick == 0) {
            who = static_cast<std::uint32_t>(k);
            break;
          }
          --pick;
        }
      }

      const double P = cfg.policy.powers[q];
      const double R = codeword_rate(cfg.quantizer, cfg.policy, q);
      const double inc = increment_for(R, ge, P);
      s.rate += inc;
      s.rate_sq += inc * inc;
      s.power += P;
      s.power_sq += P * P;
      if (cfg.keep_trace) {
        for (int k = 0; k < K; ++k) {
          tr.gains[l * static_cast<std::uint64_t>(K) + static_cast<std::uint64_t>(k)] = g[k];
          tr.feedback[l * static_cast<std::uint64_t>(K) + static_cast<std::uint64_t>(k)] = fb[k];
        }
        tr.eve_gain[l] = ge;
        tr.selected[l] = q;
        tr.receiver[l] = who;
        tr.power[l] = P;
        tr.rate[l] = R;
        tr.increment[l] = inc;
      }
    }
    sums[c] = s;
  });

  ChunkSums total;
  for (const auto& s : sums) {
    total.rate += s.rate;
    total.rate_sq += s.rate_sq;
    total.power += s.power;
    total.power_sq += s.power_sq;
  }
  const Moments r = moments(total.rate, total.rate_sq, L);
  const Moments p = moments(total.power, total.power_sq, L);
  out.rate_estimate = r.mean;
  out.std_error = r.std_error;
  out.mean_power = p.mean;
  out.power_std_error = p.std_error;
  return out;
}

SimResult simulate_common(const SimConfig& cfg) { return simulate(cfg, Selection::Min); }

SimResult simulate_sum(const SimConfig& cfg) { return simulate(cfg, Selection::Max); }

double replay_rate(const BlockFadingTrace& trace, const Quantizer& quant,
                   const PowerPolicy& policy, Selection rule) {
  const std::uint64_t L = trace.size();
  if (L == 0) throw DomainError("empty trace");
  if (policy.powers.size() != quant.cells()) {
    throw DomainError("power policy does not match the quantizer");
  }
  const std::uint64_t chunks = (L + kChunk - 1) / kChunk;
  double total = 0.0;
  for (std::uint64_t c = 0; c < chunks; ++c) {
    const std::uint64_t first = c * kChunk, last = std::min(L, first + kChunk);
    double s = 0.0;
    for (std::uint64_t l = first; l < last; ++l) {
      std::size_t q = quant.index_of(trace.gain(l, 0));
      for (int k = 1; k < trace.K; ++k) {
        const std::size_t qk = quant.index_of(trace.gain(l, k));
        q = rule == Selection::Min ? std::min(q, qk) : std::max(q, qk);
      }
      s += increment_for(codeword_rate(quant, policy, q), trace.eve_gain[l], policy.powers[q]);
    }
    total += s;
  }
  return total / static_cast<double>(L);
}

std::vector<double> empirical_cell_occupancy(const BlockFadingTrace& trace,
                                             std::size_t cells) {
  if (trace.size() < 10'000) throw DomainError("occupancy needs at least 10^4 blocks");
  std::vector<std::uint64_t> counts(cells, 0);
  for (std::uint32_t q : trace.selected) {
    if (q >= cells) throw DomainError("selected cell outside the quantizer");
    ++counts[q];
  }
  std::vector<double> out(cells);
  const double L = static_cast<double>(trace.size());
  for (std::size_t q = 0; q < cells; ++q) out[q] = static_cast<double>(counts[q]) / L;
  return out;
}

OccupancyTest occupancy_chi_square(const BlockFadingTrace& trace,
                                   const std::vector<double>& expected,
                                   double significance) {
  const auto observed = empirical_cell_occupancy(trace, expected.size());
  const double L = static_cast<double>(trace.size());
  OccupancyTest t;
  int used = 0;
  for (std::size_t q = 0; q < expected.size(); ++q) {
    if (expected[q] <= 0.0) {
      if (observed[q] > 0.0) {
        t.chi_square = std::numeric_limits<double>::infinity();
      }
      continue;
    }
    const double e = expected[q] * L, o = observed[q] * L;
    t.chi_square += (o - e) * (o - e) / e;
    ++used;
  }
  t.degrees_of_freedom = std::max(1, used - 1);
  if (std::isinf(t.chi_square)) {
    t.p_value = 0.0;
  } else {
    const boost::math::chi_squared dist(t.degrees_of_freedom);
    t.p_value = boost::math::cdf(boost::math::complement(dist, t.chi_square));
  }
  t.consistent = t.p_value >= significance;
  return t;
}

void write_trace_csv(std::ostream& out, const BlockFadingTrace& trace) {
  if (trace.K > 0 && trace.gains.size() != trace.size() * static_cast<std::size_t>(trace.K)) {
    throw DomainError("trace was recorded without per-block data");
  }
  out << "block";
  for (int k = 1; k <= trace.K; ++k) out << ",gamma_" << k;
  out << ",gamma_e,q_sel,power,rate,increment\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << ',' << buf;
  };
  for (std::size_t l = 0; l < trace.size(); ++l) {
    out << l;
    for (int k = 0; k < trace.K; ++k) num(trace.gain(l, k));
    num(trace.eve_gain[l]);
    out << ',' << trace.selected[l];
    num(trace.power[l]);
    num(trace.rate[l]);
    num(trace.increment[l]);
    out << '\n';
  }
}

}  // namespace wiretap
