#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "resample_lab/filter.hpp"
#include "resample_lab/particle_system.hpp"
#include "resample_lab/random_stream.hpp"
#include "resample_lab/resampling.hpp"

namespace resample_lab {

// Distance to the nearest integer below which alpha g(x) counts as integral.
inline constexpr double kSupportTolerance = 1e-6;
// Target mass of that set above which limit experiments refuse to run.
inline constexpr double kSupportAbortThreshold = 1e-3;
inline constexpr std::size_t kSupportSamples = 100'000;

// Instrumental density nu on a 1-D domain and importance ratio g = mu / nu,
// with alpha the limit of n / m.
struct DensityPair {
  std::string name;
  std::function<double(RandomStream&)> nu_sampler;
  std::function<double(double)> nu_density;
  std::function<double(double)> g;
  double g_bound = 0.0;
  double alpha = 1.0;
  double domain_lo = 0.0;
  double domain_hi = 1.0;
};

void validate(const DensityPair& pair);

// nu = uniform(0, 1), g(x) = 2x, i.e. mu(x) = 2x.
DensityPair reference_pair(double alpha = 1.0);
// nu = uniform(0, 1), g = 1. alpha g is integral everywhere when alpha is.
DensityPair flat_pair(double alpha = 1.0);

// sum_i floor(n w_i) / n f(xi_i)
double floor_weight_sum(std::span<const double> weights, std::span<const double> f, std::size_t n);
inline double floor_weight_sum(const ParticleSystem& system, const TestFunction& f,
                               std::size_t n) {
  return floor_weight_sum(system.weights(), f.evaluate(system), n);
}

// nu-integrals needed by the limit formulas, by piecewise quadrature split at
// the jumps of floor(alpha g).
struct PairIntegrals {
  double nu_floor = 0.0;        // nu{ floor(alpha g) / alpha }
  double nu_floor_f = 0.0;      // nu{ floor(alpha g) / alpha f }
  double nu_excess_f = 0.0;     // nu{ (g - floor(alpha g) / alpha) f }
  double nu_excess_f2 = 0.0;    // nu{ (g - floor(alpha g) / alpha) f^2 }
  double mu_f = 0.0;            // nu{ g f }
  double mu_f2 = 0.0;           // nu{ g f^2 }
  double support_mass = 0.0;    // nu{ g 1[dist(alpha g, N) < kSupportTolerance] }
  std::size_t panels = 0;
  double refinement_change = 0.0;
};

PairIntegrals integrate_pair(const DensityPair& pair, const TestFunction& f);

// nu{ (1/alpha) floor(alpha g) f }, the floor-sum limit.
double lemma1_target(const DensityPair& pair, const TestFunction& f);

// Residual limit variance
//   nu{(g - floor(alpha g)/alpha) f^2} - nu{(g - floor(alpha g)/alpha) f}^2 / (1 - nu{floor(alpha g)/alpha}).
// Throws SupportConditionViolated when the support mass exceeds
// kSupportAbortThreshold and DegenerateKappa when the denominator vanishes.
double residual_kappa(const DensityPair& pair, const TestFunction& f);

// mu(f^2) - mu(f)^2, the multinomial limit.
double multinomial_kappa(const DensityPair& pair, const TestFunction& f);

// Self-normalized importance sampling estimate of the mu-mass of
// {x : |alpha g(x) - round(alpha g(x))| < tolerance}, from `samples` draws of nu.
double support_condition_estimate(const DensityPair& pair, std::size_t samples, double tolerance,
                                  RandomStream& stream);

struct LimitCheckResult {
  std::vector<std::size_t> m_grid;
  std::vector<std::size_t> n_grid;      // round(alpha m)
  std::vector<double> estimates;        // mean floor sum per m
  std::vector<double> spreads;          // interquartile range per m
  std::vector<double> standard_deviations;
  std::size_t replicates = 0;
  double target = 0.0;
  double support_violation_estimate = 0.0;
};

// Floor sums over i.i.d. nu-samples with weights g / sum g, at n = round(alpha m).
// Replicate r at grid index j draws from stream.derive(j).offset(r).
LimitCheckResult lemma1_experiment(const DensityPair& pair, const TestFunction& f,
                                   std::span<const std::size_t> m_grid, std::size_t replicates,
                                   const RandomStream& stream, std::size_t threads = 1);

struct ScaledVarianceRow {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t replicates = 0;
  double scaled_var = 0.0;  // mean over replicates of n Var[. | particles]
  double scaled_var_stderr = 0.0;
  std::optional<double> target;
};

// n times the exact conditional variance of `scheme` on fresh weighted
// systems of size m = round(n / alpha). Targets: multinomial_kappa for
// multinomial, residual_kappa for residual, none otherwise.
std::vector<ScaledVarianceRow> scaled_condvar_experiment(Scheme scheme, const DensityPair& pair,
                                                         const TestFunction& f,
                                                         std::span<const std::size_t> n_grid,
                                                         std::size_t replicates,
                                                         const RandomStream& stream,
                                                         std::size_t threads = 1);

struct CltRow {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t replicates = 0;
  double mean_error = 0.0;  // mean of estimate - reference
  double variance = 0.0;
  double scaled_var = 0.0;  // n * variance
  double scaled_var_stderr = 0.0;
  double anderson_darling = 0.0;  // A^2 of the replicate estimates
  std::optional<double> ratio_to_previous;
  std::vector<double> estimates;
};

struct CltReport {
  double reference = 0.0;
  std::vector<CltRow> rows;
};

// Runs the bootstrap filter (m = n, resampling every step) up to time k for
// each n and records the filtered estimate of f at k. Replicate r at grid
// index j uses stream.derive(j).offset(r) for every scheme, so runs with
// different schemes are paired.
CltReport clt_experiment(Scheme scheme, const StateSpaceModel& model, const TestFunction& f,
                         std::size_t k, std::span<const std::size_t> n_grid,
                         std::size_t replicates, double reference, const RandomStream& stream,
                         std::size_t threads = 1);

// "m,n,replicates,estimate,iqr,target"
std::string lemma1_csv(const LimitCheckResult& result);
// "n,m,replicates,scaled_var,scaled_var_stderr,target"
std::string scaled_rows_csv(std::span<const ScaledVarianceRow> rows);
// "n,m,replicates,scaled_var,scaled_var_stderr,target,mean_error,anderson_darling"
std::string clt_csv(const CltReport& report);

std::string lemma1_json(const LimitCheckResult& result);
std::string scaled_rows_json(std::span<const ScaledVarianceRow> rows);
std::string clt_json(const CltReport& report);

}  // namespace resample_lab
