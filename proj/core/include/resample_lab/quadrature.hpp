#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace resample_lab {

// Vector-valued integrand: writes `components` values at x into `out`.
using Integrand = std::function<void(double x, std::span<double> out)>;

// Piece label of a piecewise-smooth integrand, e.g. floor(alpha g(x)). The
// integrand is assumed smooth wherever the label is constant.
using PieceLabel = std::function<double(double x)>;

// Composite 3-point Gauss-Legendre rule on `panels` equal panels of [lo, hi].
// A panel whose end labels differ is split at the label change, located by
// bisection to machine precision, so jumps cost no accuracy.
std::vector<double> integrate_piecewise(const Integrand& integrand, std::size_t components,
                                        const PieceLabel& label, double lo, double hi,
                                        std::size_t panels);

struct RefinedIntegral {
  std::vector<double> values;
  std::size_t panels = 0;
  double last_change = 0.0;  // max |difference| between the last two refinements
  bool converged = false;
};

// Doubles the panel count from `initial_panels` until successive results
// differ by less than `tolerance` in every component or `max_panels` is hit.
RefinedIntegral integrate_refined(const Integrand& integrand, std::size_t components,
                                  const PieceLabel& label, double lo, double hi,
                                  std::size_t initial_panels = 1'000'000,
                                  double tolerance = 1e-9,
                                  std::size_t max_panels = 16'000'000);

}  // namespace resample_lab
