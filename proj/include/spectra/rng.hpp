#pragma once
#include <cstdint>

namespace spectra {

// Counter-based generator: every output is a pure function of
// (seed, stream_id, draw index), so parallel workers that own disjoint
// streams produce results independent of scheduling and worker count.
//
// Construction: the (seed, stream) pair is hashed into a per-stream key k;
// draw i outputs mix64(k + GOLDEN*(i+1)), i.e. a SplitMix64 sequence whose
// start state is the stream key.
struct CounterRng {
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  std::uint64_t key = 0;
  std::uint64_t ctr = 0;

  static std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 33;
    z *= 0xff51afd7ed558ccdULL;
    z ^= z >> 33;
    z *= 0xc4ceb9fe1a85ec53ULL;
    z ^= z >> 33;
    return z;
  }

  CounterRng() = default;
  CounterRng(std::uint64_t seed, std::uint64_t stream_id) {
    key = mix64(seed ^ (0x5851f42d4c957f2dULL * (stream_id + 1)));
    key = mix64(key + stream_id);
    ctr = 0;
  }

  // Value of draw `i` without advancing state.
  std::uint64_t at(std::uint64_t i) const { return mix64(key + kGolden * (i + 1)); }

  std::uint64_t next() { return at(ctr++); }

  void skip_to(std::uint64_t i) { ctr = i; }

  // Uniform in [0,1), 53-bit resolution.
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, bound) via rejection (unbiased).
  std::uint64_t uniform_index(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    for (;;) {
      std::uint64_t v = next();
      if (v < limit) return v % bound;
    }
  }

  // Standard normal via Box-Muller (two draws per pair, caches nothing so
  // the draw count stays a pure function of the call sequence).
  double normal();
};

}  // namespace spectra
