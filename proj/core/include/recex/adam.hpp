#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace recex {

// Plain Adam. One instance per parameter tensor; step() applies an update
// from the matching gradient. lr = 0 leaves parameters bit-identical.
struct Adam {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  std::vector<double> m;
  std::vector<double> v;
  long t = 0;

  void ensure(std::size_t n) {
    if (m.size() != n) {
      m.assign(n, 0.0);
      v.assign(n, 0.0);
      t = 0;
    }
  }

  void step(std::span<double> params, std::span<const double> grads) {
    ensure(params.size());
    ++t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * grads[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * grads[i] * grads[i];
      const double mh = m[i] / c1;
      const double vh = v[i] / c2;
      params[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
  }
};

}  // namespace recex
