#include "resample_lab/particle_system.hpp"

#include <algorithm>
#include <cmath>

#include "resample_lab/errors.hpp"

namespace resample_lab {

std::vector<double> normalize_weights(std::span<const double> raw) {
  if (raw.empty()) throw DegenerateWeights("empty weight sequence");
  double total = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double w = raw[i];
    if (!std::isfinite(w) || w < 0.0) {
      throw InvalidWeight("weight " + std::to_string(i) + " is negative or not finite");
    }
    total += w;
  }
  if (!(total > 0.0)) throw DegenerateWeights("all weights are zero");
  if (!std::isfinite(total)) throw InvalidWeight("weight total overflows");

  std::vector<double> out(raw.size());
  std::transform(raw.begin(), raw.end(), out.begin(), [total](double w) { return w / total; });
  return out;
}

CumulativeWeights::CumulativeWeights(std::span<const double> weights) : upper_(weights.size()) {
  if (weights.empty()) throw DegenerateWeights("empty weight sequence");
  double running = 0.0;
  std::size_t last_positive = weights.size();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    running += weights[i];
    upper_[i] = std::min(running, 1.0);
    if (weights[i] > 0.0) last_positive = i;
  }
  if (last_positive == weights.size()) throw DegenerateWeights("all weights are zero");
  std::fill(upper_.begin() + static_cast<std::ptrdiff_t>(last_positive), upper_.end(), 1.0);
}

std::size_t CumulativeWeights::locate(double u) const {
  // first i with upper(i) >= u
  const auto it = std::lower_bound(upper_.begin(), upper_.end(), u);
  return static_cast<std::size_t>(it - upper_.begin());
}

std::size_t CumulativeWeights::locate_after(double u) const {
  // first i with upper(i) > u
  const auto it = std::upper_bound(upper_.begin(), upper_.end(), u);
  return static_cast<std::size_t>(it - upper_.begin());
}

std::size_t inverse_cdf(std::span<const double> weights, double u) {
  if (!(u > 0.0 && u <= 1.0)) throw OutOfRange("inverse_cdf requires u in (0, 1]");
  return CumulativeWeights(weights).locate(u);
}

double effective_sample_size(std::span<const double> weights) {
  double sum_sq = 0.0;
  for (double w : weights) sum_sq += w * w;
  return 1.0 / sum_sq;
}

double weighted_sum(std::span<const double> weights, std::span<const double> values) {
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) acc += weights[i] * values[i];
  return acc;
}

ParticleSystem::ParticleSystem(std::size_t dimension, std::vector<double> coordinates,
                               std::span<const double> raw_weights)
    : dimension_(dimension), coordinates_(std::move(coordinates)) {
  if (dimension_ == 0) throw InvalidConfig("state dimension must be at least 1");
  if (coordinates_.size() != raw_weights.size() * dimension_) {
    throw InvalidConfig("positions and weights have different lengths");
  }
  weights_ = normalize_weights(raw_weights);
}

ParticleSystem::ParticleSystem(Normalized, std::size_t dimension, std::vector<double> coordinates,
                               std::vector<double> weights)
    : dimension_(dimension), coordinates_(std::move(coordinates)), weights_(std::move(weights)) {}

ParticleSystem ParticleSystem::scalar(std::vector<double> positions,
                                      std::span<const double> raw_weights) {
  return ParticleSystem(1, std::move(positions), raw_weights);
}

ParticleSystem ParticleSystem::uniform(std::size_t dimension, std::vector<double> coordinates) {
  if (dimension == 0 || coordinates.empty() || coordinates.size() % dimension != 0) {
    throw InvalidConfig("coordinates do not describe a nonempty set of states");
  }
  const std::size_t count = coordinates.size() / dimension;
  std::vector<double> weights(count, 1.0 / static_cast<double>(count));
  return ParticleSystem(Normalized{}, dimension, std::move(coordinates), std::move(weights));
}

bool ParticleSystem::equally_weighted() const {
  return std::all_of(weights_.begin(), weights_.end(),
                     [first = weights_.front()](double w) { return w == first; });
}

ParticleSystem ParticleSystem::reweighted(std::span<const double> raw_weights) const {
  return ParticleSystem(dimension_, coordinates_, raw_weights);
}

TestFunction::TestFunction(std::string name, Evaluator evaluator, double bound)
    : name_(std::move(name)), evaluator_(std::move(evaluator)), bound_(bound) {}

std::vector<double> TestFunction::evaluate(const ParticleSystem& system) const {
  std::vector<double> out(system.size());
  for (std::size_t i = 0; i < system.size(); ++i) {
    out[i] = evaluator_(system.position(i));
    if (!std::isfinite(out[i])) {
      throw InvalidConfig("test function '" + name_ + "' is not finite at particle " +
                          std::to_string(i));
    }
  }
  return out;
}

TestFunction TestFunction::constant(double c) {
  return TestFunction("constant", [c](std::span<const double>) { return c; }, std::abs(c));
}

TestFunction TestFunction::coordinate(std::size_t component) {
  return TestFunction("x" + std::to_string(component),
                      [component](std::span<const double> x) { return x[component]; });
}

double weighted_mean(const ParticleSystem& system, const TestFunction& f) {
  return weighted_sum(system.weights(), f.evaluate(system));
}

}  // namespace resample_lab
