#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "resample_lab/particle_system.hpp"
#include "resample_lab/random_stream.hpp"
#include "resample_lab/resampling.hpp"

namespace resample_lab {

using State = std::vector<double>;

// A state-space model as seen by the particle filter. Observations enter only
// through the likelihoods g_k evaluated at states.
//
// Time index convention: samplers and weights receive the index k of the
// state being produced, so a move from time k-1 to k calls
// transition_sampler(x_{k-1}, k, stream) and likelihood(x_k, k).
struct StateSpaceModel {
  std::size_t dimension = 1;

  // Draws x_0 from rho_0.
  std::function<State(RandomStream&)> initial_sampler;
  // nu(x) g_0(x) / rho_0(x)
  std::function<double(std::span<const double>)> initial_weight;
  // Draws from the state transition q(x_{k-1}, .).
  std::function<State(std::span<const double>, std::size_t, RandomStream&)> transition_sampler;
  // Draws from the proposal r(x_{k-1}, .). Leave empty for r = q (bootstrap).
  std::function<State(std::span<const double>, std::size_t, RandomStream&)> proposal_sampler;
  // q(x_{k-1}, x_k) g_k(x_k) / r(x_{k-1}, x_k); only used when a proposal is set.
  std::function<double(std::span<const double>, std::span<const double>, std::size_t)>
      weight_ratio;
  // g_k(x)
  std::function<double(std::span<const double>, std::size_t)> likelihood;
  // Upper bound on g_k.
  double likelihood_bound = std::numeric_limits<double>::infinity();

  bool bootstrap() const { return !proposal_sampler; }
};

struct FilterConfig {
  std::size_t m = 1000;  // particles drawn at initialization
  std::size_t n = 1000;  // particles kept after each resampling
  Scheme scheme = Scheme::systematic;
  std::size_t resample_every = 1;  // 0 never resamples (pure SIS)
  std::size_t horizon = 0;         // number of time indices 0 .. horizon-1
};

struct TraceRow {
  std::size_t k = 0;
  std::vector<double> estimates;  // sum_i w_i f(xi_i) before resampling
  double ess = 0.0;
  double log_normalizer_increment = 0.0;
  bool resampled = false;
  std::size_t population = 0;
};

struct FilterTrace {
  std::vector<std::string> function_names;
  std::vector<TraceRow> rows;
};

// Streams used at time k: propagation and resampling draws come from
// disjoint families so a change of scheme leaves the propagation draws alone.
RandomStream propagation_stream(const RandomStream& base, std::size_t k);
RandomStream resampling_stream(const RandomStream& base, std::size_t k);

// m particles from rho_0 with normalized weights nu g_0 / rho_0.
ParticleSystem sisr_init(const StateSpaceModel& model, std::size_t m, RandomStream& stream);

// Moves every particle to time k through the proposal (or the transition when
// r = q) and multiplies its weight by q g_k / r (or g_k). When the incoming
// weights are all equal the common factor is dropped before normalization, so
// the result is bit-identical to the bootstrap weights g_k / sum g_k.
ParticleSystem sisr_step(const ParticleSystem& system, const StateSpaceModel& model,
                         std::size_t k, RandomStream& stream);

struct BootstrapStepResult {
  ParticleSystem system;  // resampled, n equally weighted particles
  TraceRow row;
};

// One bootstrap iteration from an equally weighted population: propagate
// through q, weight by g_k / sum g_k, record estimates, resample to n.
// Draws from propagation_stream(base, k) and resampling_stream(base, k).
BootstrapStepResult bootstrap_step(const ParticleSystem& system, const StateSpaceModel& model,
                                   std::size_t k, std::size_t n, Scheme scheme,
                                   std::span<const TestFunction> functions,
                                   const RandomStream& base);

// Runs SISR over time indices 0 .. horizon-1, resampling after the estimate at
// k whenever (k + 1) is a multiple of resample_every. Deterministic in `base`.
// Degenerate weights are rethrown as FilterStepError carrying k.
FilterTrace run_filter(const StateSpaceModel& model, const FilterConfig& config,
                       std::span<const TestFunction> functions, const RandomStream& base);

// Observation files: header "k,y", one row per time index.
std::vector<double> read_observations(std::istream& in);
void write_observations(std::ostream& out, std::span<const double> observations);

// Header "k,estimate_<name>...,ess,resampled".
std::string trace_csv(const FilterTrace& trace);
std::string trace_json(const FilterTrace& trace);

}  // namespace resample_lab
