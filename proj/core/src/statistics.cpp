#include "resample_lab/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>
#include <vector>

#include "resample_lab/errors.hpp"

namespace resample_lab {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw InvalidConfig("mean of an empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw InvalidConfig("sample variance needs at least two values");
  const double mu = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - mu) * (x - mu);
  return acc / static_cast<double>(xs.size() - 1);
}

VarianceEstimate variance_with_stderr(std::span<const double> xs, std::size_t batches) {
  const std::size_t n = xs.size();
  if (n < 2) throw InvalidConfig("variance estimate needs at least two replicates");
  const double mu = mean(xs);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = (xs[i] - mu) * (xs[i] - mu);
  const double correction = static_cast<double>(n) / static_cast<double>(n - 1);

  VarianceEstimate out;
  out.value = std::accumulate(sq.begin(), sq.end(), 0.0) / static_cast<double>(n - 1);

  if (batches >= 2 && n >= 2 * batches) {
    const std::size_t size = n / batches;
    std::vector<double> batch_means(batches);
    for (std::size_t b = 0; b < batches; ++b) {
      const auto first = sq.begin() + static_cast<std::ptrdiff_t>(b * size);
      batch_means[b] = std::accumulate(first, first + static_cast<std::ptrdiff_t>(size), 0.0) /
                       static_cast<double>(size);
    }
    out.standard_error = correction * std::sqrt(sample_variance(batch_means) / static_cast<double>(batches));
    return out;
  }

  if (n < 3) {
    // normal-theory error; the jackknife needs leave-one-out samples of size >= 2
    out.standard_error = out.value * std::sqrt(2.0);
    return out;
  }
  // Leave-one-out variances from running sums.
  const double sum = std::accumulate(xs.begin(), xs.end(), 0.0);
  double sum_sq = 0.0;
  for (double x : xs) sum_sq += x * x;
  std::vector<double> loo(n);
  const double k = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = sum - xs[i];
    const double s2 = sum_sq - xs[i] * xs[i];
    loo[i] = std::max(0.0, (s2 - s * s / k) / (k - 1.0));
  }
  const double loo_mean = mean(loo);
  double acc = 0.0;
  for (double v : loo) acc += (v - loo_mean) * (v - loo_mean);
  out.standard_error = std::sqrt(k / static_cast<double>(n) * acc);
  return out;
}

VarianceEstimate paired_variance_difference(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw InvalidConfig("paired comparison needs two samples of equal size >= 2");
  }
  const std::size_t n = a.size();
  const double mu_a = mean(a);
  const double mu_b = mean(b);
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] = (a[i] - mu_a) * (a[i] - mu_a) - (b[i] - mu_b) * (b[i] - mu_b);
  }
  const double correction = static_cast<double>(n) / static_cast<double>(n - 1);
  VarianceEstimate out;
  out.value = correction * mean(diff);
  out.standard_error = correction * std::sqrt(sample_variance(diff) / static_cast<double>(n));
  return out;
}

double quantile(std::span<const double> xs, double p) {
  if (xs.empty()) throw InvalidConfig("quantile of an empty sample");
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double interquartile_range(std::span<const double> xs) {
  return quantile(xs, 0.75) - quantile(xs, 0.25);
}

double anderson_darling_normal(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 3) throw InvalidConfig("Anderson-Darling needs at least three values");
  const double mu = mean(xs);
  const double sd = std::sqrt(sample_variance(xs));
  if (!(sd > 0.0)) return std::numeric_limits<double>::infinity();

  std::vector<double> z(xs.begin(), xs.end());
  std::sort(z.begin(), z.end());
  auto cdf = [&](double x) { return 0.5 * std::erfc(-(x - mu) / (sd * std::sqrt(2.0))); };
  constexpr double kTiny = 1e-300;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = std::max(cdf(z[i]), kTiny);
    const double hi = std::max(1.0 - cdf(z[n - 1 - i]), kTiny);
    acc += (2.0 * static_cast<double>(i) + 1.0) * (std::log(lo) + std::log(hi));
  }
  const double nd = static_cast<double>(n);
  const double a2 = -nd - acc / nd;
  return a2 * (1.0 + 0.75 / nd + 2.25 / (nd * nd));
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  workers.reserve(threads);
  const std::size_t block = (count + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t first = t * block;
    const std::size_t last = std::min(count, first + block);
    if (first >= last) break;
    workers.emplace_back([&, first, last] {
      try {
        for (std::size_t i = first; i < last; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace resample_lab
