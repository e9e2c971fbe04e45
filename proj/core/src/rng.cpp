#include "recex/rng.hpp"

#include <cmath>
#include <numbers>

#include "recex/errors.hpp"

namespace recex {

uint64_t Rng::uniform_int(uint64_t n) {
  if (n == 0) throw NumericError("uniform_int: n must be positive");
  // Reject draws above the largest multiple of n to avoid modulo bias.
  const uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % n);
  uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % n;
}

double Rng::normal() {
  // Box-Muller, cosine branch only. u1 is nudged away from 0 so log stays finite.
  double u1 = uniform();
  double u2 = uniform();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void Rng::fill_normal(std::span<double> out, double mean, double stddev) {
  for (double& v : out) v = mean + stddev * normal();
}

}  // namespace recex
