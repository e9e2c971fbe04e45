#include "recex/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "recex/errors.hpp"
#include "recex/rng.hpp"

namespace recex {

GradCheckReport finite_difference_check(const LossFn& loss,
                                        std::span<const double> params,
                                        std::span<const double> analytic,
                                        double eps, double tol,
                                        std::size_t max_coords, uint64_t seed) {
  if (params.size() != analytic.size())
    throw NumericError("finite_difference_check: gradient/parameter size mismatch");
  if (!(eps >= 1e-7 && eps <= 1e-4))
    throw NumericError("finite_difference_check: eps outside [1e-7, 1e-4]");

  std::vector<std::size_t> coords(params.size());
  for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
  if (max_coords > 0 && coords.size() > max_coords) {
    Rng rng(seed);
    for (std::size_t i = 0; i < max_coords; ++i) {
      const std::size_t j = i + rng.uniform_int(coords.size() - i);
      std::swap(coords[i], coords[j]);
    }
    coords.resize(max_coords);
  }

  std::vector<double> probe(params.begin(), params.end());
  GradCheckReport report;
  report.coords_checked = coords.size();

  for (std::size_t c : coords) {
    const double saved = probe[c];
    probe[c] = saved + eps;
    const double up = loss(probe);
    probe[c] = saved - eps;
    const double down = loss(probe);
    probe[c] = saved;
    if (!std::isfinite(up) || !std::isfinite(down))
      throw NumericError("loss not evaluable");

    const double fd = (up - down) / (2.0 * eps);
    const double g = analytic[c];
    const double rel = std::abs(g - fd) / std::max(1e-4, std::abs(g) + std::abs(fd));
    if (rel > report.max_rel_err) {
      report.max_rel_err = rel;
      report.worst_coord = c;
      report.analytic_at_worst = g;
      report.numeric_at_worst = fd;
    }
    if (rel > tol) report.failing.push_back(c);
  }
  report.pass = report.failing.empty();
  return report;
}

}  // namespace recex
