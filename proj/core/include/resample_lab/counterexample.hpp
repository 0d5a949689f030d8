#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "resample_lab/particle_system.hpp"

namespace resample_lab {

// Two-value population where systematic resampling fails to dominate
// multinomial resampling.
//
// n/2 particles sit at x1 with weight 2 omega / n and n/2 at x0 with weight
// 2 (1 - omega) / n. The canonical layout is interleaved: x0, x1, x0, x1, ...
enum class Ordering { interleaved, blocked, permuted };

std::string_view ordering_name(Ordering ordering);
std::optional<Ordering> try_parse_ordering(std::string_view name);

struct CounterExampleConfig {
  std::size_t n = 4;
  double omega = 0.75;
  double x0 = 0.0;
  double x1 = 1.0;
  double f0 = 0.0;
  double f1 = 1.0;
  Ordering ordering = Ordering::interleaved;
  // Shuffle seed for Ordering::permuted.
  std::uint64_t permutation_seed = 0;
};

// Throws InvalidConfig for odd or zero n, omega outside [1/2, 1) or x0 == x1.
void validate(const CounterExampleConfig& config);

ParticleSystem make_counterexample(const CounterExampleConfig& config);

// f(x0) = f0, f(x1) = f1 (nearest of the two support points elsewhere).
TestFunction counterexample_function(const CounterExampleConfig& config);

struct CounterExampleVariances {
  double multinomial = 0.0;          // (1/n) (1 - w) w |f|^2
  double residual_stratified = 0.0;  // (1/n) (2w - 1)(1 - w) |f|^2, shared by both schemes
  double systematic = 0.0;           // (w - 1/2)(1 - w) |f|^2, independent of n
};

// Analytic variances for the interleaved layout, |f| = |f1 - f0|.
// Throws UnsupportedOrdering for any other layout.
CounterExampleVariances counterexample_analytic(const CounterExampleConfig& config);

}  // namespace resample_lab
