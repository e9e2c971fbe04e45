#pragma once

#include <cstdint>
#include <span>

namespace recex {

// Seeded pseudo-random generator used everywhere randomness is needed.
//
// The algorithm is pinned and must never change silently: it is SplitMix64
// (Steele, Lea & Flood; the public-domain reference by Sebastiano Vigna),
// a counter-based generator with a 64-bit state advanced by the golden-ratio
// increment 0x9E3779B97F4A7C15 and a two-round xor-multiply finalizer.
// Identical seeds produce identical streams on every platform; the unit
// tests freeze the first outputs for seeds 0 and 42 as test vectors.
//
// uniform() maps the top 53 bits to [0,1). normal() is Box-Muller without
// pair caching, so the full generator state is the single 64-bit counter
// and checkpoints can store it directly.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1), 53 bits of precision.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Rejection keeps the distribution exact.
  uint64_t uniform_int(uint64_t n);

  // Standard normal draw. Consumes exactly two 64-bit outputs.
  double normal();

  void fill_normal(std::span<double> out, double mean, double stddev);

  uint64_t state() const { return state_; }
  void set_state(uint64_t s) { state_ = s; }

  // Derives an independent seed for a sub-stream (e.g. per-epoch shuffles).
  uint64_t fork_seed() { return next_u64(); }

 private:
  uint64_t state_;
};

}  // namespace recex
