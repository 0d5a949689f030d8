#include "resample_lab/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "resample_lab/errors.hpp"

namespace resample_lab {
namespace {

// Nodes and weights on [-1, 1].
constexpr double kNode = 0.7745966692414833770;  // sqrt(3/5)
constexpr double kOuter = 5.0 / 9.0;
constexpr double kInner = 8.0 / 9.0;

void gauss3(const Integrand& integrand, double a, double b, std::span<double> scratch,
            std::vector<double>& acc) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const double nodes[3] = {mid - half * kNode, mid, mid + half * kNode};
  const double weights[3] = {kOuter, kInner, kOuter};
  for (int j = 0; j < 3; ++j) {
    integrand(nodes[j], scratch);
    for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += half * weights[j] * scratch[c];
  }
}

// Point in (a, b] where the label changes from label(a), to machine precision.
double locate_change(const PieceLabel& label, double a, double b) {
  const double left = label(a);
  for (int it = 0; it < 200 && b - a > 0.0; ++it) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    (label(mid) == left ? a : b) = mid;
  }
  return b;
}

}  // namespace

std::vector<double> integrate_piecewise(const Integrand& integrand, std::size_t components,
                                        const PieceLabel& label, double lo, double hi,
                                        std::size_t panels) {
  if (!(hi > lo) || panels == 0) throw InvalidConfig("quadrature needs lo < hi and panels >= 1");
  std::vector<double> acc(components, 0.0);
  std::vector<double> scratch(components);
  const double width = (hi - lo) / static_cast<double>(panels);
  double a = lo;
  double label_a = label(a);
  for (std::size_t p = 0; p < panels; ++p) {
    const double b = p + 1 == panels ? hi : lo + static_cast<double>(p + 1) * width;
    const double label_b = label(b);
    double start = a;
    double start_label = label_a;
    // A panel may hold several changes when the label moves fast; peel them off.
    while (start_label != label_b) {
      const double cut = locate_change(label, start, b);
      if (cut >= b) break;
      gauss3(integrand, start, cut, scratch, acc);
      start = cut;
      start_label = label(cut);
    }
    gauss3(integrand, start, b, scratch, acc);
    a = b;
    label_a = label_b;
  }
  return acc;
}

RefinedIntegral integrate_refined(const Integrand& integrand, std::size_t components,
                                  const PieceLabel& label, double lo, double hi,
                                  std::size_t initial_panels, double tolerance,
                                  std::size_t max_panels) {
  RefinedIntegral out;
  out.panels = initial_panels;
  out.values = integrate_piecewise(integrand, components, label, lo, hi, out.panels);
  while (out.panels * 2 <= max_panels) {
    const std::size_t panels = out.panels * 2;
    auto refined = integrate_piecewise(integrand, components, label, lo, hi, panels);
    double change = 0.0;
    for (std::size_t c = 0; c < components; ++c) {
      change = std::max(change, std::abs(refined[c] - out.values[c]));
    }
    out.values = std::move(refined);
    out.panels = panels;
    out.last_change = change;
    if (change < tolerance) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace resample_lab
