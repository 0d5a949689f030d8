#include "resample_lab/variance.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "resample_lab/errors.hpp"
#include "resample_lab/statistics.hpp"

namespace resample_lab {
namespace {

void check_inputs(std::span<const double> weights, std::span<const double> f, std::size_t n) {
  if (n == 0) throw InvalidConfig("number of offspring n must be at least 1");
  if (weights.size() != f.size()) throw InvalidConfig("weights and f values differ in length");
  if (weights.empty()) throw DegenerateWeights("empty particle system");
}

double weighted_square_sum(std::span<const double> weights, std::span<const double> f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) acc += weights[i] * f[i] * f[i];
  return acc;
}

// Variance of sum_i N_i f_i / scale where N ~ Mult(draws; w), by enumerating
// every count vector. Returns nullopt when there are too many of them.
std::optional<double> enumerate_multinomial(std::span<const double> w, std::span<const double> f,
                                            std::size_t draws, double scale,
                                            double max_outcomes) {
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) support.push_back(i);
  }
  const double k = static_cast<double>(support.size());
  const double d = static_cast<double>(draws);
  const double log_outcomes =
      std::lgamma(d + k) - std::lgamma(d + 1.0) - std::lgamma(k);  // C(d + k - 1, k - 1)
  if (log_outcomes > std::log(max_outcomes)) return std::nullopt;

  const double expected = d * weighted_sum(w, f) / scale;
  const double log_draws_factorial = std::lgamma(d + 1.0);
  double variance = 0.0;

  std::function<void(std::size_t, std::size_t, double, double)> recurse =
      [&](std::size_t pos, std::size_t remaining, double log_p, double value) {
        const std::size_t i = support[pos];
        if (pos + 1 == support.size()) {
          const double c = static_cast<double>(remaining);
          const double lp = log_p + c * std::log(w[i]) - std::lgamma(c + 1.0);
          const double x = value + c * f[i] / scale;
          variance += std::exp(log_draws_factorial + lp) * (x - expected) * (x - expected);
          return;
        }
        for (std::size_t c = 0; c <= remaining; ++c) {
          const double cd = static_cast<double>(c);
          recurse(pos + 1, remaining - c,
                  log_p + cd * std::log(w[i]) - std::lgamma(cd + 1.0), value + cd * f[i] / scale);
        }
      };
  recurse(0, draws, 0.0, 0.0);
  return variance;
}

// Sum over strata of the variance of f(xi(D^inv((k + u) / s))) with u
// uniform on (0, 1], each integrated exactly over its pieces.
double enumerate_strata(std::span<const double> w, std::span<const double> f, std::size_t strata) {
  const CumulativeWeights cdf(w);
  const double s = static_cast<double>(strata);
  const auto bounds = cdf.bounds();
  double total = 0.0;
  std::vector<double> cuts;
  std::size_t first = 0;
  for (std::size_t k = 0; k < strata; ++k) {
    const double kd = static_cast<double>(k);
    cuts.assign({0.0});
    while (first < bounds.size() && s * bounds[first] - kd <= 0.0) ++first;
    for (std::size_t j = first; j < bounds.size(); ++j) {
      const double u = s * bounds[j] - kd;
      if (u >= 1.0) break;
      cuts.push_back(u);
    }
    cuts.push_back(1.0);
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
      const double len = cuts[j + 1] - cuts[j];
      if (len <= 0.0) continue;
      const double mid = 0.5 * (cuts[j] + cuts[j + 1]);
      const double value = f[cdf.locate((kd + mid) / s)];
      m1 += len * value;
      m2 += len * value * value;
    }
    total += std::max(0.0, m2 - m1 * m1);
  }
  return total;
}

}  // namespace

double cond_var_multinomial(std::span<const double> weights, std::span<const double> f,
                            std::size_t n) {
  check_inputs(weights, f, n);
  const double mean = weighted_sum(weights, f);
  return (weighted_square_sum(weights, f) - mean * mean) / static_cast<double>(n);
}

double cond_var_residual(std::span<const double> weights, std::span<const double> f,
                         std::size_t n) {
  check_inputs(weights, f, n);
  const ResidualDecomposition d = decompose_residual(weights, n);
  if (d.random_draws() == 0) return 0.0;

  const double nd = static_cast<double>(n);
  const double n2 = nd * nd;
  double floor_term = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    floor_term += static_cast<double>(d.deterministic_counts[i]) * f[i] * f[i];
  }
  const double residual_mean = weighted_sum(d.residual_weights, f);
  return weighted_square_sum(weights, f) / nd - floor_term / n2 -
         static_cast<double>(d.random_draws()) / n2 * residual_mean * residual_mean;
}

std::vector<double> stratum_means(std::span<const double> weights, std::span<const double> f,
                                  std::size_t strata) {
  if (strata == 0) throw InvalidConfig("at least one stratum is required");
  const CumulativeWeights cdf(weights);
  const double s = static_cast<double>(strata);
  std::vector<double> means(strata, 0.0);
  std::size_t i = 0;
  for (std::size_t k = 0; k < strata; ++k) {
    const double lo = static_cast<double>(k) / s;
    const double hi = k + 1 == strata ? 1.0 : static_cast<double>(k + 1) / s;
    double acc = 0.0;
    for (;;) {
      const double a = std::max(lo, cdf.lower(i));
      const double b = std::min(hi, cdf.upper(i));
      if (b > a) acc += (b - a) * f[i];
      if (cdf.upper(i) >= hi) break;
      ++i;
    }
    means[k] = s * acc;
  }
  return means;
}

double cond_var_stratified(std::span<const double> weights, std::span<const double> f,
                           std::size_t n) {
  check_inputs(weights, f, n);
  const double nd = static_cast<double>(n);
  double squares = 0.0;
  for (double mu : stratum_means(weights, f, n)) squares += mu * mu;
  return weighted_square_sum(weights, f) / nd - squares / (nd * nd);
}

double cond_var_residual_stratified(std::span<const double> weights, std::span<const double> f,
                                    std::size_t n) {
  check_inputs(weights, f, n);
  const ResidualDecomposition d = decompose_residual(weights, n);
  const std::size_t draws = d.random_draws();
  if (draws == 0) return 0.0;
  const double nd = static_cast<double>(n);
  double squares = 0.0;
  for (double mu : stratum_means(d.residual_weights, f, draws)) squares += mu * mu;
  return (static_cast<double>(draws) * weighted_square_sum(d.residual_weights, f) - squares) /
         (nd * nd);
}

double cond_var_systematic_exact(std::span<const double> weights, std::span<const double> f,
                                 std::size_t n) {
  check_inputs(weights, f, n);
  const CumulativeWeights cdf(weights);
  const double nd = static_cast<double>(n);
  const std::size_t m = weights.size();

  // Work with the shift u in (0, 1]; stratum k sits at (k + u) / n. Stratum k
  // crosses the cumulative boundary c when u passes n c - k, for the unique k
  // with k < n c <= k + 1. Everything is keyed on the product n * c so the
  // starting selections and the crossing events agree bit for bit.
  double start_sum = 0.0;
  {
    std::size_t i = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double kd = static_cast<double>(k);
      while (nd * cdf.upper(i) <= kd) ++i;
      start_sum += f[i];
    }
  }

  struct Event {
    double u;
    double delta;
  };
  std::vector<Event> events;
  for (std::size_t i = 0; i < m; ++i) {
    const double c = cdf.upper(i);
    if (!(c > 0.0) || c >= 1.0) continue;
    if (i + 1 < m && cdf.upper(i + 1) == c) continue;  // only the last of a run of equal bounds
    const double t = nd * c;
    const double k = std::ceil(t) - 1.0;
    const std::size_t left = cdf.locate(c);
    const std::size_t right = cdf.locate_after(c);
    events.push_back({t - k, f[right] - f[left]});
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.u < b.u; });

  std::vector<double> lengths;
  std::vector<double> values;
  lengths.reserve(events.size() + 1);
  values.reserve(events.size() + 1);
  double previous = 0.0;
  double sum = start_sum;
  for (const Event& e : events) {
    const double u = std::min(e.u, 1.0);
    if (u > previous) {
      lengths.push_back(u - previous);
      values.push_back(sum / nd);
      previous = u;
    }
    sum += e.delta;
  }
  if (previous < 1.0) {
    lengths.push_back(1.0 - previous);
    values.push_back(sum / nd);
  }

  double expected = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) expected += lengths[j] * values[j];
  double variance = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    variance += lengths[j] * (values[j] - expected) * (values[j] - expected);
  }
  return variance;
}

std::optional<double> closed_form_variance(Scheme scheme, std::span<const double> weights,
                                           std::span<const double> f, std::size_t n) {
  switch (scheme) {
    case Scheme::multinomial:
      return cond_var_multinomial(weights, f, n);
    case Scheme::residual:
      return cond_var_residual(weights, f, n);
    case Scheme::stratified:
      return cond_var_stratified(weights, f, n);
    case Scheme::residual_stratified:
      return cond_var_residual_stratified(weights, f, n);
    case Scheme::systematic:
      return std::nullopt;
  }
  throw std::logic_error("unknown scheme");
}

std::optional<double> enumerated_variance(Scheme scheme, std::span<const double> weights,
                                          std::span<const double> f, std::size_t n,
                                          double max_outcomes) {
  check_inputs(weights, f, n);
  const double nd = static_cast<double>(n);
  switch (scheme) {
    case Scheme::multinomial:
      return enumerate_multinomial(weights, f, n, nd, max_outcomes);
    case Scheme::residual: {
      const ResidualDecomposition d = decompose_residual(weights, n);
      if (d.random_draws() == 0) return 0.0;
      return enumerate_multinomial(d.residual_weights, f, d.random_draws(), nd, max_outcomes);
    }
    case Scheme::stratified:
      return enumerate_strata(weights, f, n) / (nd * nd);
    case Scheme::residual_stratified: {
      const ResidualDecomposition d = decompose_residual(weights, n);
      if (d.random_draws() == 0) return 0.0;
      return enumerate_strata(d.residual_weights, f, d.random_draws()) / (nd * nd);
    }
    case Scheme::systematic:
      return cond_var_systematic_exact(weights, f, n);
  }
  throw std::logic_error("unknown scheme");
}

VarianceReport cond_var_mc(Scheme scheme, const ParticleSystem& system, std::span<const double> f,
                           std::size_t n, std::size_t replicates, const RandomStream& stream,
                           std::size_t threads) {
  check_inputs(system.weights(), f, n);
  if (replicates < 2) throw InvalidConfig("Monte Carlo variance needs at least two replicates");

  std::vector<double> estimates(replicates);
  const double nd = static_cast<double>(n);
  parallel_for(replicates, threads, [&](std::size_t r) {
    RandomStream replicate = stream.offset(r);
    const ResampleOutput out = resample(scheme, system, n, replicate);
    double acc = 0.0;
    for (std::size_t i = 0; i < out.counts.size(); ++i) {
      acc += static_cast<double>(out.counts[i]) * f[i];
    }
    estimates[r] = acc / nd;
  });

  const VarianceEstimate v = variance_with_stderr(estimates);
  VarianceReport report;
  report.scheme = scheme;
  report.n = n;
  report.closed_form = closed_form_variance(scheme, system.weights(), f, n);
  report.exact_enumeration = enumerated_variance(scheme, system.weights(), f, n);
  report.mc_estimate = v.value;
  report.mc_stderr = v.standard_error;
  report.replicates = replicates;
  return report;
}

}  // namespace resample_lab
