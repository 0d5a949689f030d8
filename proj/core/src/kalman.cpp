#include "resample_lab/kalman.hpp"

#include <cmath>

#include "resample_lab/errors.hpp"

namespace resample_lab {

void validate(const LinearGaussianParams& params) {
  if (!(params.sigma_w > 0.0) || !(params.sigma_v > 0.0)) {
    throw InvalidConfig("noise standard deviations must be positive");
  }
  if (!(params.prior_var > 0.0)) throw InvalidConfig("prior variance must be positive");
  if (!std::isfinite(params.a) || !std::isfinite(params.prior_mean)) {
    throw InvalidConfig("model coefficients must be finite");
  }
}

std::vector<KalmanEstimate> kalman_oracle(const LinearGaussianParams& params,
                                          std::span<const double> observations) {
  validate(params);
  const double obs_var = params.sigma_v * params.sigma_v;
  const double state_var = params.sigma_w * params.sigma_w;

  std::vector<KalmanEstimate> out;
  out.reserve(observations.size());
  double mean = params.prior_mean;
  double var = params.prior_var;
  for (std::size_t k = 0; k < observations.size(); ++k) {
    if (k > 0) {
      mean = params.a * mean;
      var = params.a * params.a * var + state_var;
    }
    KalmanEstimate e;
    e.predicted_mean = mean;
    e.predicted_variance = var;
    const double gain = var / (var + obs_var);
    mean += gain * (observations[k] - mean);
    var *= 1.0 - gain;
    e.mean = mean;
    e.variance = var;
    out.push_back(e);
  }
  return out;
}

}  // namespace resample_lab
