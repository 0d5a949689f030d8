#include "resample_lab/linear_gaussian.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include "resample_lab/errors.hpp"

namespace resample_lab {

StateSpaceModel make_linear_gaussian_model(const LinearGaussianParams& params,
                                           std::vector<double> observations) {
  validate(params);
  StateSpaceModel model;
  model.dimension = 1;

  const double prior_sd = std::sqrt(params.prior_var);
  const double obs_var = params.sigma_v * params.sigma_v;
  const double density_scale = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * params.sigma_v);
  auto obs = std::make_shared<const std::vector<double>>(std::move(observations));

  model.likelihood = [obs, obs_var, density_scale](std::span<const double> x, std::size_t k) {
    if (k >= obs->size()) {
      throw InvalidConfig("no observation at time index " + std::to_string(k));
    }
    const double r = (*obs)[k] - x[0];
    return density_scale * std::exp(-0.5 * r * r / obs_var);
  };
  model.likelihood_bound = density_scale;

  model.initial_sampler = [params, prior_sd](RandomStream& s) {
    return State{params.prior_mean + prior_sd * s.normal()};
  };
  model.initial_weight = [g = model.likelihood](std::span<const double> x) { return g(x, 0); };
  model.transition_sampler = [params](std::span<const double> x, std::size_t, RandomStream& s) {
    return State{params.a * x[0] + params.sigma_w * s.normal()};
  };
  return model;
}

std::vector<double> simulate_linear_gaussian(const LinearGaussianParams& params,
                                             std::size_t steps, RandomStream& stream) {
  validate(params);
  std::vector<double> observations(steps);
  double x = params.prior_mean + std::sqrt(params.prior_var) * stream.normal();
  for (std::size_t k = 0; k < steps; ++k) {
    if (k > 0) x = params.a * x + params.sigma_w * stream.normal();
    observations[k] = x + params.sigma_v * stream.normal();
  }
  return observations;
}

std::vector<double> reference_observations(const LinearGaussianParams& params) {
  RandomStream stream(kReferenceObservationSeed, 0);
  return simulate_linear_gaussian(params, kReferenceObservationSteps, stream);
}

}  // namespace resample_lab
