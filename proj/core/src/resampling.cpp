#include "resample_lab/resampling.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "resample_lab/errors.hpp"

namespace resample_lab {
namespace {

void require_offspring(std::size_t n) {
  if (n == 0) throw InvalidConfig("number of offspring n must be at least 1");
}

void check_uniform(double u) {
  if (!(u > 0.0 && u <= 1.0)) throw OutOfRange("driving uniform outside (0, 1]");
}

void check_uniforms(std::span<const double> uniforms) {
  for (double u : uniforms) check_uniform(u);
}

// Appends offspring for increasing points p_0 <= p_1 <= ... in (0, 1].
template <typename PointAt>
void select_sorted(const CumulativeWeights& cdf, std::size_t count, PointAt point_at,
                   ResampleOutput& out) {
  std::size_t i = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double p = point_at(k);
    while (cdf.upper(i) < p) ++i;
    out.indices.push_back(i);
    ++out.counts[i];
  }
}

ResampleOutput empty_output(std::size_t particles, std::size_t n) {
  ResampleOutput out;
  out.indices.reserve(n);
  out.counts.assign(particles, 0);
  return out;
}

void append_deterministic(const ResidualDecomposition& decomposition, ResampleOutput& out) {
  for (std::size_t i = 0; i < decomposition.deterministic_counts.size(); ++i) {
    for (std::size_t c = 0; c < decomposition.deterministic_counts[i]; ++c) {
      out.indices.push_back(i);
    }
    out.counts[i] += decomposition.deterministic_counts[i];
  }
}

}  // namespace

std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::multinomial:
      return "multinomial";
    case Scheme::residual:
      return "residual";
    case Scheme::stratified:
      return "stratified";
    case Scheme::systematic:
      return "systematic";
    case Scheme::residual_stratified:
      return "residual-stratified";
  }
  throw std::logic_error("unknown scheme");
}

std::optional<Scheme> try_parse_scheme(std::string_view name) {
  std::string lowered(name);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Scheme s : kAllSchemes) {
    if (scheme_name(s) == lowered) return s;
  }
  return std::nullopt;
}

std::string valid_scheme_names() {
  std::string out;
  for (Scheme s : kAllSchemes) {
    if (!out.empty()) out += ", ";
    out += scheme_name(s);
  }
  return out;
}

Scheme parse_scheme(std::string_view name) {
  if (auto s = try_parse_scheme(name)) return *s;
  throw InvalidConfig("unknown scheme '" + std::string(name) + "'; valid schemes: " +
                      valid_scheme_names());
}

ResidualDecomposition decompose_residual(std::span<const double> weights, std::size_t n) {
  require_offspring(n);
  ResidualDecomposition d;
  d.n = n;
  d.deterministic_counts.resize(weights.size());
  const double nd = static_cast<double>(n);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double copies = std::floor(nd * weights[i]);
    d.deterministic_counts[i] = static_cast<std::size_t>(copies);
    d.deterministic_total += d.deterministic_counts[i];
  }
  if (d.deterministic_total > n) {
    throw InvalidWeight("weights sum to more than one; floor copies exceed n");
  }
  if (d.deterministic_total < n) {
    const double remaining = static_cast<double>(n - d.deterministic_total);
    d.residual_weights.resize(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
      const double scaled = nd * weights[i];
      d.residual_weights[i] = (scaled - std::floor(scaled)) / remaining;
    }
  }
  return d;
}

std::size_t uniforms_required(Scheme scheme, std::span<const double> weights, std::size_t n) {
  switch (scheme) {
    case Scheme::multinomial:
    case Scheme::stratified:
      return n;
    case Scheme::systematic:
      return 1;
    case Scheme::residual:
    case Scheme::residual_stratified:
      return decompose_residual(weights, n).random_draws();
  }
  throw std::logic_error("unknown scheme");
}

ResampleOutput multinomial_from_uniforms(std::span<const double> weights,
                                         std::span<const double> uniforms) {
  require_offspring(uniforms.size());
  check_uniforms(uniforms);
  const CumulativeWeights cdf(weights);
  ResampleOutput out = empty_output(weights.size(), uniforms.size());
  for (double u : uniforms) {
    const std::size_t i = cdf.locate(u);
    out.indices.push_back(i);
    ++out.counts[i];
  }
  return out;
}

ResampleOutput stratified_from_uniforms(std::span<const double> weights,
                                        std::span<const double> uniforms) {
  const std::size_t n = uniforms.size();
  require_offspring(n);
  check_uniforms(uniforms);
  const CumulativeWeights cdf(weights);
  ResampleOutput out = empty_output(weights.size(), n);
  const double nd = static_cast<double>(n);
  select_sorted(cdf, n, [&](std::size_t k) { return (static_cast<double>(k) + uniforms[k]) / nd; },
                out);
  return out;
}

ResampleOutput systematic_from_uniform(std::span<const double> weights, std::size_t n, double u) {
  require_offspring(n);
  check_uniform(u);
  const CumulativeWeights cdf(weights);
  ResampleOutput out = empty_output(weights.size(), n);
  const double nd = static_cast<double>(n);
  select_sorted(cdf, n, [&](std::size_t k) { return (static_cast<double>(k) + u) / nd; }, out);
  return out;
}

ResampleOutput residual_from_uniforms(std::span<const double> weights, std::size_t n,
                                      std::span<const double> uniforms) {
  const ResidualDecomposition d = decompose_residual(weights, n);
  if (uniforms.size() != d.random_draws()) {
    throw InvalidConfig("residual resampling needs exactly n - R uniforms");
  }
  ResampleOutput out = empty_output(weights.size(), n);
  append_deterministic(d, out);
  if (d.random_draws() == 0) return out;

  check_uniforms(uniforms);
  const CumulativeWeights cdf(d.residual_weights);
  for (double u : uniforms) {
    const std::size_t i = cdf.locate(u);
    out.indices.push_back(i);
    ++out.counts[i];
  }
  return out;
}

ResampleOutput residual_stratified_from_uniforms(std::span<const double> weights, std::size_t n,
                                                 std::span<const double> uniforms) {
  const ResidualDecomposition d = decompose_residual(weights, n);
  const std::size_t draws = d.random_draws();
  if (uniforms.size() != draws) {
    throw InvalidConfig("residual-stratified resampling needs exactly n - R uniforms");
  }
  ResampleOutput out = empty_output(weights.size(), n);
  append_deterministic(d, out);
  if (draws == 0) return out;

  check_uniforms(uniforms);
  const CumulativeWeights cdf(d.residual_weights);
  const double strata = static_cast<double>(draws);
  select_sorted(cdf, draws,
                [&](std::size_t k) { return (static_cast<double>(k) + uniforms[k]) / strata; }, out);
  return out;
}

ResampleOutput resample_from_uniforms(Scheme scheme, std::span<const double> weights,
                                      std::size_t n, std::span<const double> uniforms) {
  switch (scheme) {
    case Scheme::multinomial:
      if (uniforms.size() != n) throw InvalidConfig("multinomial resampling needs n uniforms");
      return multinomial_from_uniforms(weights, uniforms);
    case Scheme::stratified:
      if (uniforms.size() != n) throw InvalidConfig("stratified resampling needs n uniforms");
      return stratified_from_uniforms(weights, uniforms);
    case Scheme::systematic:
      if (uniforms.size() != 1) throw InvalidConfig("systematic resampling needs one uniform");
      return systematic_from_uniform(weights, n, uniforms.front());
    case Scheme::residual:
      return residual_from_uniforms(weights, n, uniforms);
    case Scheme::residual_stratified:
      return residual_stratified_from_uniforms(weights, n, uniforms);
  }
  throw std::logic_error("unknown scheme");
}

ResampleOutput multinomial_resample(const ParticleSystem& system, std::size_t n,
                                    RandomStream& stream) {
  require_offspring(n);
  return multinomial_from_uniforms(system.weights(), uniform_draws(stream, n));
}

ResampleOutput residual_resample(const ParticleSystem& system, std::size_t n,
                                 RandomStream& stream) {
  const std::size_t draws = uniforms_required(Scheme::residual, system.weights(), n);
  return residual_from_uniforms(system.weights(), n, uniform_draws(stream, draws));
}

ResampleOutput stratified_resample(const ParticleSystem& system, std::size_t n,
                                   RandomStream& stream) {
  require_offspring(n);
  return stratified_from_uniforms(system.weights(), uniform_draws(stream, n));
}

ResampleOutput systematic_resample(const ParticleSystem& system, std::size_t n,
                                   RandomStream& stream) {
  require_offspring(n);
  return systematic_from_uniform(system.weights(), n, stream.uniform());
}

ResampleOutput residual_stratified_resample(const ParticleSystem& system, std::size_t n,
                                            RandomStream& stream) {
  const std::size_t draws = uniforms_required(Scheme::residual_stratified, system.weights(), n);
  return residual_stratified_from_uniforms(system.weights(), n, uniform_draws(stream, draws));
}

ResampleOutput resample(Scheme scheme, const ParticleSystem& system, std::size_t n,
                        RandomStream& stream) {
  switch (scheme) {
    case Scheme::multinomial:
      return multinomial_resample(system, n, stream);
    case Scheme::residual:
      return residual_resample(system, n, stream);
    case Scheme::stratified:
      return stratified_resample(system, n, stream);
    case Scheme::systematic:
      return systematic_resample(system, n, stream);
    case Scheme::residual_stratified:
      return residual_stratified_resample(system, n, stream);
  }
  throw std::logic_error("unknown scheme");
}

ParticleSystem apply_resample(const ParticleSystem& system, const ResampleOutput& output) {
  const std::size_t dim = system.dimension();
  std::vector<double> coordinates;
  coordinates.reserve(output.indices.size() * dim);
  for (std::size_t ancestor : output.indices) {
    if (ancestor >= system.size()) {
      throw std::out_of_range("ancestor index " + std::to_string(ancestor) +
                              " outside particle system of size " +
                              std::to_string(system.size()));
    }
    const auto x = system.position(ancestor);
    coordinates.insert(coordinates.end(), x.begin(), x.end());
  }
  return ParticleSystem::uniform(dim, std::move(coordinates));
}

}  // namespace resample_lab
