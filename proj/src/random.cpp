#include "wiretap/random.hpp"

namespace wiretap {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t block,
                           std::uint64_t terminal) {
  // Chain the key components through the mixer so that nearby
  // (block, terminal) pairs land on unrelated keys.
  key_ = mix64(mix64(mix64(seed) ^ block) ^ (terminal * 0xd1b54a32d192ed03ULL));
}

std::uint64_t RandomStream::next_u64() {
  const std::uint64_t c = counter_++;
  return mix64(key_ ^ mix64(c ^ 0x632be59bd9b4e019ULL));
}

double RandomStream::next_uniform() {
  // 53 random mantissa bits, offset by half an ulp to exclude 0 and 1.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace wiretap
