#pragma once

#include <cstdint>

namespace wiretap {

/// Counter-based random stream.
///
/// Every draw is a pure function of (seed, block, terminal, counter), so a
/// stream can be recreated anywhere from its key. Simulation workers never
/// share generator state; block `l` of terminal `t` always sees the same
/// numbers regardless of how blocks are distributed across threads.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t block, std::uint64_t terminal);

  std::uint64_t next_u64();

  /// Uniform draw on the open interval (0, 1).
  double next_uniform();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// SplitMix64 finalizer; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x);

}  // namespace wiretap
