#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace resample_lab {

// Normalizes nonnegative raw weights so they sum to one.
// Throws InvalidWeight on negative or non-finite entries and
// DegenerateWeights when the input is empty or sums to zero.
std::vector<double> normalize_weights(std::span<const double> raw);

// Cumulative weight table used by every inverse-CDF based scheme.
//
// Particle i owns the left-open, right-closed interval
// (c[i-1], c[i]] where c is the running sum of the weights. Sums are taken
// left to right. The table is clamped to [0, 1] and the entry of the last
// particle with positive weight (and every entry after it) is pinned to 1,
// so that every u in (0, 1] maps to a particle with positive weight even when
// the floating point total differs from one by an ulp.
class CumulativeWeights {
 public:
  explicit CumulativeWeights(std::span<const double> weights);

  std::size_t size() const noexcept { return upper_.size(); }

  // Right end of particle i's interval.
  double upper(std::size_t i) const { return upper_[i]; }
  // Left end of particle i's interval.
  double lower(std::size_t i) const { return i == 0 ? 0.0 : upper_[i - 1]; }

  std::span<const double> bounds() const noexcept { return upper_; }

  // The unique i with u in (lower(i), upper(i)]. Requires 0 < u <= 1.
  std::size_t locate(double u) const;

  // The particle selected just to the right of u, i.e. the limit of
  // locate(u + eps) as eps -> 0+. Requires 0 <= u < 1.
  std::size_t locate_after(double u) const;

 private:
  std::vector<double> upper_;
};

// D^inv(u) for normalized weights, 0-based. Throws OutOfRange unless 0 < u <= 1.
std::size_t inverse_cdf(std::span<const double> weights, double u);

// 1 / sum(w_i^2).
double effective_sample_size(std::span<const double> weights);

// sum_i w_i * values_i
double weighted_sum(std::span<const double> weights, std::span<const double> values);

// Particle positions and normalized weights. Positions are fixed-dimension
// real vectors stored contiguously. Order is significant: stratified and
// systematic resampling depend on it.
class ParticleSystem {
 public:
  // Raw weights are normalized on construction.
  ParticleSystem(std::size_t dimension, std::vector<double> coordinates,
                 std::span<const double> raw_weights);

  // One-dimensional states.
  static ParticleSystem scalar(std::vector<double> positions, std::span<const double> raw_weights);

  // Every weight equal to 1/size.
  static ParticleSystem uniform(std::size_t dimension, std::vector<double> coordinates);

  std::size_t size() const noexcept { return weights_.size(); }
  std::size_t dimension() const noexcept { return dimension_; }

  std::span<const double> position(std::size_t i) const {
    return {coordinates_.data() + i * dimension_, dimension_};
  }
  std::span<const double> coordinates() const noexcept { return coordinates_; }
  std::span<const double> weights() const noexcept { return weights_; }
  double weight(std::size_t i) const { return weights_[i]; }

  // True when every stored weight compares equal to the first one.
  bool equally_weighted() const;

  // Same positions, new raw weights (normalized).
  ParticleSystem reweighted(std::span<const double> raw_weights) const;

 private:
  struct Normalized {};
  ParticleSystem(Normalized, std::size_t dimension, std::vector<double> coordinates,
                 std::vector<double> weights);

  std::size_t dimension_;
  std::vector<double> coordinates_;
  std::vector<double> weights_;
};

// A bounded real function of the state.
class TestFunction {
 public:
  using Evaluator = std::function<double(std::span<const double>)>;

  TestFunction(std::string name, Evaluator evaluator,
               double bound = std::numeric_limits<double>::infinity());

  const std::string& name() const noexcept { return name_; }
  double bound() const noexcept { return bound_; }

  double operator()(std::span<const double> state) const { return evaluator_(state); }
  double operator()(double x) const { return evaluator_(std::span<const double>(&x, 1)); }

  // f at every particle position; throws InvalidConfig on a non-finite value.
  std::vector<double> evaluate(const ParticleSystem& system) const;

  // f(x) = c
  static TestFunction constant(double c);
  // f(x) = x[component]
  static TestFunction coordinate(std::size_t component = 0);

 private:
  std::string name_;
  Evaluator evaluator_;
  double bound_;
};

// sum_i w_i f(xi_i), the self-normalized estimate.
double weighted_mean(const ParticleSystem& system, const TestFunction& f);

}  // namespace resample_lab
