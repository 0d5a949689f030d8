#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "resample_lab/particle_system.hpp"
#include "resample_lab/random_stream.hpp"

namespace resample_lab {

enum class Scheme { multinomial, residual, stratified, systematic, residual_stratified };

inline constexpr std::array<Scheme, 5> kAllSchemes = {
    Scheme::multinomial, Scheme::residual, Scheme::stratified, Scheme::systematic,
    Scheme::residual_stratified};

// "multinomial", "residual", "stratified", "systematic", "residual-stratified"
std::string_view scheme_name(Scheme scheme);

// Case-insensitive. Returns nullopt for unknown names.
std::optional<Scheme> try_parse_scheme(std::string_view name);

// Case-insensitive; throws InvalidConfig naming the valid schemes.
Scheme parse_scheme(std::string_view name);

// "multinomial, residual, stratified, systematic, residual-stratified"
std::string valid_scheme_names();

// Offspring ancestors (0-based) and duplication counts N^i.
//
// Offspring order: draw order for multinomial, stratum order for stratified
// and systematic, and for the residual schemes the deterministic copies in
// ancestor order followed by the random residual draws.
struct ResampleOutput {
  std::vector<std::size_t> indices;
  std::vector<std::size_t> counts;

  std::size_t offspring() const noexcept { return indices.size(); }
};

// floor(n w_i) copies per particle plus the residual weights
//   wbar_i = (n w_i - floor(n w_i)) / (n - R),  R = sum_i floor(n w_i).
// residual_weights is empty when R == n.
struct ResidualDecomposition {
  std::size_t n = 0;
  std::vector<std::size_t> deterministic_counts;
  std::size_t deterministic_total = 0;  // R
  std::vector<double> residual_weights;

  std::size_t random_draws() const noexcept { return n - deterministic_total; }
};

ResidualDecomposition decompose_residual(std::span<const double> weights, std::size_t n);

// Number of (0, 1] uniforms consumed by `scheme` for this weight vector.
std::size_t uniforms_required(Scheme scheme, std::span<const double> weights, std::size_t n);

// The schemes as deterministic maps from their driving uniforms to offspring.
// Every uniform must lie in (0, 1]; otherwise OutOfRange is thrown.
//
//   multinomial:  I^k = D^inv(u_k), n = uniforms.size()
//   stratified:   I^k = D^inv((k + u_k) / n), n = uniforms.size()
//   systematic:   I^k = D^inv((k + u) / n), a single u
//   residual:     floor copies, then n - R multinomial draws on wbar
//   residual-stratified: floor copies, then n - R stratified draws on wbar
ResampleOutput multinomial_from_uniforms(std::span<const double> weights,
                                         std::span<const double> uniforms);
ResampleOutput stratified_from_uniforms(std::span<const double> weights,
                                        std::span<const double> uniforms);
ResampleOutput systematic_from_uniform(std::span<const double> weights, std::size_t n, double u);
ResampleOutput residual_from_uniforms(std::span<const double> weights, std::size_t n,
                                      std::span<const double> uniforms);
ResampleOutput residual_stratified_from_uniforms(std::span<const double> weights, std::size_t n,
                                                 std::span<const double> uniforms);
ResampleOutput resample_from_uniforms(Scheme scheme, std::span<const double> weights,
                                      std::size_t n, std::span<const double> uniforms);

ResampleOutput multinomial_resample(const ParticleSystem& system, std::size_t n,
                                    RandomStream& stream);
ResampleOutput residual_resample(const ParticleSystem& system, std::size_t n,
                                 RandomStream& stream);
ResampleOutput stratified_resample(const ParticleSystem& system, std::size_t n,
                                   RandomStream& stream);
ResampleOutput systematic_resample(const ParticleSystem& system, std::size_t n,
                                   RandomStream& stream);
ResampleOutput residual_stratified_resample(const ParticleSystem& system, std::size_t n,
                                            RandomStream& stream);

ResampleOutput resample(Scheme scheme, const ParticleSystem& system, std::size_t n,
                        RandomStream& stream);

// Equally weighted system holding the selected ancestors in offspring order.
ParticleSystem apply_resample(const ParticleSystem& system, const ResampleOutput& output);

}  // namespace resample_lab
