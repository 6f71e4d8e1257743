#pragma once

#include <cstdint>
#include <random>

namespace fiveq {

// All randomness in the library flows through explicitly seeded generators.
// Worker shards derive independent streams from (seed, stream_id) so that
// sharded runs merge deterministically regardless of thread scheduling.
class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t stream = 0)
      : gen_(mix(seed, stream)) {}

  uint64_t next_u64() { return gen_(); }

  // uniform in [0, 1)
  double next_double() {
    return (gen_() >> 11) * 0x1.0p-53;
  }

  // uniform integer in [0, n)
  uint64_t next_below(uint64_t n) {
    std::uniform_int_distribution<uint64_t> d(0, n - 1);
    return d(gen_);
  }

  bool next_bool() { return gen_() & 1; }

  // Binomial(n, p); exact inversion for small n*p, normal tail not needed at
  // the sample sizes used here, so fall back to std::binomial_distribution.
  uint64_t next_binomial(uint64_t n, double p) {
    std::binomial_distribution<uint64_t> d(n, p);
    return d(gen_);
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  static uint64_t mix(uint64_t seed, uint64_t stream) {
    // splitmix64 over the pair; decorrelates nearby seeds and streams
    uint64_t x = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  std::mt19937_64 gen_;
};

}  // namespace fiveq
