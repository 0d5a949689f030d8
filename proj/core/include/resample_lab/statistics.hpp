#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace resample_lab {

double mean(std::span<const double> xs);

// Unbiased sample variance (divisor n - 1). Requires at least two values.
double sample_variance(std::span<const double> xs);

// Sample variance together with a standard error for it.
struct VarianceEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

// Sample variance of `xs` with its standard error. With at least
// 2 * batches values the error comes from batch means of the squared
// deviations; below that it falls back to the jackknife.
VarianceEstimate variance_with_stderr(std::span<const double> xs, std::size_t batches = 100);

// Var(a) - Var(b) for paired samples, with a standard error computed from the
// per-pair differences of squared deviations.
VarianceEstimate paired_variance_difference(std::span<const double> a, std::span<const double> b);

// Type-7 quantile (linear interpolation), p in [0, 1].
double quantile(std::span<const double> xs, double p);

double interquartile_range(std::span<const double> xs);

// Anderson-Darling A^2 against a normal with estimated mean and variance,
// with the usual small-sample correction (1 + 0.75/n + 2.25/n^2).
double anderson_darling_normal(std::span<const double> xs);

// Runs body(i) for i in [0, count) on up to `threads` workers. Work is split
// into contiguous blocks; callers write results into per-index slots so the
// outcome does not depend on the thread count.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace resample_lab
