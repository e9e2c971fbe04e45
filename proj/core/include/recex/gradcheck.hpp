#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace recex {

// Result of comparing an analytic gradient against central differences.
//
// The relative error per coordinate is |g - fd| / max(1e-4, |g| + |fd|).
// The floor keeps roundoff noise on exactly-zero gradients from registering
// as disagreement; any real gradient bug shows up as an O(1) ratio.
struct GradCheckReport {
  double max_rel_err = 0.0;
  std::size_t worst_coord = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  std::vector<std::size_t> failing;
  std::size_t coords_checked = 0;
  bool pass = false;
};

using LossFn = std::function<double(std::span<const double>)>;

// Central-difference check of `analytic` against `loss` around `params`.
// eps must lie in [1e-7, 1e-4]. When max_coords > 0 and the parameter count
// exceeds it, a seeded subset of coordinates is probed instead of all of
// them. Throws NumericError("loss not evaluable") if any probe is non-finite.
GradCheckReport finite_difference_check(const LossFn& loss,
                                        std::span<const double> params,
                                        std::span<const double> analytic,
                                        double eps, double tol,
                                        std::size_t max_coords = 0,
                                        uint64_t seed = 1);

}  // namespace recex
