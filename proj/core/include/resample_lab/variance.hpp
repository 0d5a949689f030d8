#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "resample_lab/particle_system.hpp"
#include "resample_lab/random_stream.hpp"
#include "resample_lab/resampling.hpp"

namespace resample_lab {

// Conditional variances Var[n^-1 sum_k f(xi~_k) | particles] of the
// resampling estimator. `weights` are normalized, `f` holds f(xi_i) for every
// particle, n is the number of offspring.

// (1/n) { sum w_i f_i^2 - (sum w_i f_i)^2 }
double cond_var_multinomial(std::span<const double> weights, std::span<const double> f,
                            std::size_t n);

// (1/n) sum w_i f_i^2 - sum floor(n w_i)/n^2 f_i^2 - (n-R)/n^2 (sum wbar_i f_i)^2.
// Zero when every n w_i is an integer.
double cond_var_residual(std::span<const double> weights, std::span<const double> f,
                         std::size_t n);

// (1/n) sum w_i f_i^2 - (1/n) sum_k [n int_{k/n}^{(k+1)/n} f o xi o D^inv(u) du]^2
double cond_var_stratified(std::span<const double> weights, std::span<const double> f,
                           std::size_t n);

// Residual copies plus n - R stratified draws over the residual weights with
// equal strata of width 1/(n - R):
//   (1/n^2) { (n-R) sum wbar_i f_i^2 - sum_k [(n-R) int_k f o xi o D_wbar^inv]^2 }
double cond_var_residual_stratified(std::span<const double> weights, std::span<const double> f,
                                    std::size_t n);

// Exact systematic variance. The estimator is piecewise constant in the single
// uniform; its breakpoints are the cumulative weights reduced modulo 1/n.
// Segments are enumerated and integrated exactly in O(m log m + n).
double cond_var_systematic_exact(std::span<const double> weights, std::span<const double> f,
                                 std::size_t n);

// Stratum averages s * int_{k/s}^{(k+1)/s} f o xi o D^inv(u) du for k < s,
// integrated exactly against the cumulative weight breakpoints.
std::vector<double> stratum_means(std::span<const double> weights, std::span<const double> f,
                                  std::size_t strata);

// Closed form for the scheme; nullopt for systematic, which has none.
std::optional<double> closed_form_variance(Scheme scheme, std::span<const double> weights,
                                           std::span<const double> f, std::size_t n);

// Variance by exhaustive enumeration of the resampling randomness:
// multinomial count vectors (weighted by their pmf) for the multinomial and
// residual schemes, piecewise-constant integration of the selection map over
// each stratum or over the systematic shift otherwise. Returns nullopt when
// the multinomial outcome space exceeds `max_outcomes`.
std::optional<double> enumerated_variance(Scheme scheme, std::span<const double> weights,
                                          std::span<const double> f, std::size_t n,
                                          double max_outcomes = 2e6);

inline double cond_var_multinomial(const ParticleSystem& s, const TestFunction& f, std::size_t n) {
  return cond_var_multinomial(s.weights(), f.evaluate(s), n);
}
inline double cond_var_residual(const ParticleSystem& s, const TestFunction& f, std::size_t n) {
  return cond_var_residual(s.weights(), f.evaluate(s), n);
}
inline double cond_var_stratified(const ParticleSystem& s, const TestFunction& f, std::size_t n) {
  return cond_var_stratified(s.weights(), f.evaluate(s), n);
}
inline double cond_var_residual_stratified(const ParticleSystem& s, const TestFunction& f,
                                           std::size_t n) {
  return cond_var_residual_stratified(s.weights(), f.evaluate(s), n);
}
inline double cond_var_systematic_exact(const ParticleSystem& s, const TestFunction& f,
                                        std::size_t n) {
  return cond_var_systematic_exact(s.weights(), f.evaluate(s), n);
}

struct VarianceReport {
  Scheme scheme = Scheme::multinomial;
  std::size_t n = 0;
  std::optional<double> closed_form;
  std::optional<double> exact_enumeration;
  double mc_estimate = 0.0;
  double mc_stderr = 0.0;
  std::size_t replicates = 0;
};

// Monte Carlo estimate of the conditional variance from `replicates`
// independent resamplings. Replicate r draws from stream.offset(r), so the
// result is identical for any thread count. The standard error uses batch
// means over 100 batches (jackknife below 200 replicates). closed_form and
// exact_enumeration are filled in when available.
VarianceReport cond_var_mc(Scheme scheme, const ParticleSystem& system, std::span<const double> f,
                           std::size_t n, std::size_t replicates, const RandomStream& stream,
                           std::size_t threads = 1);

inline VarianceReport cond_var_mc(Scheme scheme, const ParticleSystem& system,
                                  const TestFunction& f, std::size_t n, std::size_t replicates,
                                  const RandomStream& stream, std::size_t threads = 1) {
  return cond_var_mc(scheme, system, f.evaluate(system), n, replicates, stream, threads);
}

}  // namespace resample_lab
