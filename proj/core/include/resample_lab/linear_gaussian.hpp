#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "resample_lab/filter.hpp"
#include "resample_lab/kalman.hpp"

namespace resample_lab {

// Seed and length of the synthetic observation sequence shipped in
// data/lingauss_observations.csv.
inline constexpr std::uint64_t kReferenceObservationSeed = 2005;
inline constexpr std::size_t kReferenceObservationSteps = 50;

// Bootstrap model (rho_0 = prior, r = q) whose likelihoods are the Gaussian
// observation densities at the given observations.
StateSpaceModel make_linear_gaussian_model(const LinearGaussianParams& params,
                                           std::vector<double> observations);

// Simulates y_0 .. y_{steps-1} from the model.
std::vector<double> simulate_linear_gaussian(const LinearGaussianParams& params,
                                             std::size_t steps, RandomStream& stream);

// simulate_linear_gaussian(params, kReferenceObservationSteps,
//                          RandomStream(kReferenceObservationSeed, 0))
std::vector<double> reference_observations(const LinearGaussianParams& params = {});

}  // namespace resample_lab
