#include "resample_lab/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "resample_lab/errors.hpp"
#include "resample_lab/random_stream.hpp"

namespace resample_lab {

std::string_view ordering_name(Ordering ordering) {
  switch (ordering) {
    case Ordering::interleaved:
      return "interleaved";
    case Ordering::blocked:
      return "blocked";
    case Ordering::permuted:
      return "permuted";
  }
  return "unknown";
}

std::optional<Ordering> try_parse_ordering(std::string_view name) {
  for (Ordering o : {Ordering::interleaved, Ordering::blocked, Ordering::permuted}) {
    if (ordering_name(o) == name) return o;
  }
  return std::nullopt;
}

void validate(const CounterExampleConfig& config) {
  if (config.n < 2 || config.n % 2 != 0) {
    throw InvalidConfig("counter-example needs an even n >= 2, got " + std::to_string(config.n));
  }
  if (!(config.omega >= 0.5 && config.omega < 1.0)) {
    throw InvalidConfig("counter-example needs 1/2 <= omega < 1");
  }
  if (config.x0 == config.x1) throw InvalidConfig("counter-example needs x0 != x1");
}

ParticleSystem make_counterexample(const CounterExampleConfig& config) {
  validate(config);
  const std::size_t n = config.n;
  const double nd = static_cast<double>(n);
  const double w1 = 2.0 * config.omega / nd;
  const double w0 = 2.0 * (1.0 - config.omega) / nd;

  // Interleaved pairs (x0, x1) first; other layouts permute them.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (config.ordering == Ordering::blocked) {
    std::stable_partition(order.begin(), order.end(), [](std::size_t i) { return i % 2 == 0; });
  } else if (config.ordering == Ordering::permuted) {
    RandomStream stream(config.permutation_seed, 0);
    std::shuffle(order.begin(), order.end(), stream.engine());
  }

  std::vector<double> positions(n);
  std::vector<double> weights(n);
  for (std::size_t j = 0; j < n; ++j) {
    const bool is_x1 = order[j] % 2 == 1;
    positions[j] = is_x1 ? config.x1 : config.x0;
    weights[j] = is_x1 ? w1 : w0;
  }
  return ParticleSystem::scalar(std::move(positions), weights);
}

TestFunction counterexample_function(const CounterExampleConfig& config) {
  const double x0 = config.x0;
  const double x1 = config.x1;
  const double f0 = config.f0;
  const double f1 = config.f1;
  return TestFunction(
      "two_point",
      [=](std::span<const double> x) {
        return std::abs(x[0] - x1) < std::abs(x[0] - x0) ? f1 : f0;
      },
      std::max(std::abs(f0), std::abs(f1)));
}

CounterExampleVariances counterexample_analytic(const CounterExampleConfig& config) {
  validate(config);
  if (config.ordering != Ordering::interleaved) {
    throw UnsupportedOrdering("closed forms hold for the interleaved ordering only, got '" +
                              std::string(ordering_name(config.ordering)) + "'");
  }
  const double w = config.omega;
  const double nd = static_cast<double>(config.n);
  const double jump = std::abs(config.f1 - config.f0);
  const double f2 = jump * jump;
  CounterExampleVariances out;
  out.multinomial = (1.0 - w) * w * f2 / nd;
  out.residual_stratified = (2.0 * w - 1.0) * (1.0 - w) * f2 / nd;
  out.systematic = (w - 0.5) * (1.0 - w) * f2;
  return out;
}

}  // namespace resample_lab
