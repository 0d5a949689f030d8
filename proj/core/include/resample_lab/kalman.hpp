#pragma once

#include <span>
#include <vector>

namespace resample_lab {

// Scalar linear-Gaussian state-space model
//   x_0 ~ N(prior_mean, prior_var)
//   x_{k+1} = a x_k + sigma_w w_k
//   y_k = x_k + sigma_v v_k
struct LinearGaussianParams {
  double a = 0.9;
  double sigma_w = 0.6;
  double sigma_v = 1.0;
  double prior_mean = 0.0;
  double prior_var = 1.0;
};

// Throws InvalidConfig on non-positive noise or prior variances.
void validate(const LinearGaussianParams& params);

struct KalmanEstimate {
  double predicted_mean = 0.0;
  double predicted_variance = 0.0;
  double mean = 0.0;      // E[x_k | y_0..y_k]
  double variance = 0.0;  // Var[x_k | y_0..y_k]
};

// Exact filtering distributions for k = 0 .. observations.size() - 1.
std::vector<KalmanEstimate> kalman_oracle(const LinearGaussianParams& params,
                                          std::span<const double> observations);

}  // namespace resample_lab
