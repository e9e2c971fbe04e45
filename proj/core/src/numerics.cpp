#include "recex/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "recex/errors.hpp"

namespace recex {

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  // -log(1 + exp(-x)) for x >= 0, x - log(1 + exp(x)) otherwise.
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

void softmax_into(std::span<const double> v, std::span<double> out) {
  if (v.empty()) throw DataError("softmax: empty input");
  const double mx = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - mx);
    sum += out[i];
  }
  for (std::size_t i = 0; i < v.size(); ++i) out[i] /= sum;
}

std::vector<double> softmax(std::span<const double> v) {
  std::vector<double> out(v.size());
  softmax_into(v, out);
  return out;
}

void log_softmax_into(std::span<const double> v, std::span<double> out) {
  if (v.empty()) throw DataError("log_softmax: empty input");
  const double mx = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) sum += std::exp(v[i] - mx);
  const double lse = mx + std::log(sum);
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - lse;
}

MeanStd population_mean_std(std::span<const double> xs) {
  if (xs.empty()) throw DataError("population_mean_std: empty input");
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double sq = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    sq += d * d;
  }
  return {mean, std::sqrt(sq / static_cast<double>(xs.size()))};
}

}  // namespace recex
