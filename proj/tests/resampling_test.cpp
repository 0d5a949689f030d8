#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "resample_lab/counterexample.hpp"
#include "resample_lab/errors.hpp"
#include "resample_lab/resampling.hpp"

using namespace resample_lab;

namespace {

using Counts = std::vector<std::size_t>;

// Exact distribution of the counts: the driving uniforms are independent and
// the map is constant on the product of the pieces between breakpoints.
std::map<Counts, double> count_distribution(Scheme scheme, const std::vector<double>& w,
                                            std::size_t n) {
  const auto points = oracle::breakpoints(w, n);
  const std::size_t k = uniforms_required(scheme, w, n);
  std::map<Counts, double> dist;
  std::vector<std::size_t> cell(k, 0);
  const std::size_t pieces = points.size() - 1;
  for (;;) {
    std::vector<double> u(k);
    double p = 1.0;
    for (std::size_t j = 0; j < k; ++j) {
      u[j] = 0.5 * (points[cell[j]] + points[cell[j] + 1]);
      p *= points[cell[j] + 1] - points[cell[j]];
    }
    if (p > 0.0) dist[resample_from_uniforms(scheme, w, n, u).counts] += p;
    std::size_t pos = 0;
    while (pos < k && ++cell[pos] == pieces) cell[pos++] = 0;
    if (pos == k) break;
  }
  return dist;
}

ParticleSystem indexed(const std::vector<double>& w) {
  std::vector<double> x(w.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
  return ParticleSystem::scalar(std::move(x), w);
}

void expect_consistent(const ResampleOutput& out, std::size_t m, std::size_t n) {
  ASSERT_EQ(out.indices.size(), n);
  ASSERT_EQ(out.counts.size(), m);
  Counts tally(m, 0);
  for (auto i : out.indices) {
    ASSERT_LT(i, m);
    ++tally[i];
  }
  EXPECT_EQ(tally, out.counts);
}

}  // namespace

TEST(SchemeNames, ParseCaseInsensitive) {
  EXPECT_EQ(parse_scheme("Residual-Stratified"), Scheme::residual_stratified);
  EXPECT_EQ(parse_scheme("SYSTEMATIC"), Scheme::systematic);
  EXPECT_FALSE(try_parse_scheme("bogus").has_value());
  EXPECT_THROW(parse_scheme("bogus"), InvalidConfig);
  for (Scheme s : kAllSchemes) EXPECT_EQ(parse_scheme(scheme_name(s)), s);
  EXPECT_EQ(valid_scheme_names(), "multinomial, residual, stratified, systematic, residual-stratified");
}

TEST(Multinomial, SingleAncestor) {
  RandomStream s(1, 0);
  const auto out = multinomial_resample(indexed({1.0}), 5, s);
  EXPECT_EQ(out.counts, Counts{5});
  expect_consistent(out, 1, 5);
}

TEST(Multinomial, ExactPmfTwoParticles) {
  const auto dist = count_distribution(Scheme::multinomial, {0.5, 0.5}, 2);
  ASSERT_EQ(dist.size(), 3u);
  EXPECT_NEAR(dist.at({2, 0}), 0.25, 1e-15);
  EXPECT_NEAR(dist.at({1, 1}), 0.5, 1e-15);
  EXPECT_NEAR(dist.at({0, 2}), 0.25, 1e-15);
}

TEST(Multinomial, LargeSampleFrequencies) {
  const std::vector<double> w{0.25, 0.25, 0.5};
  const std::size_t n = 100000;
  RandomStream s(11, 0);
  const auto out = multinomial_resample(indexed(w), n, s);
  expect_consistent(out, 3, n);
  for (std::size_t i = 0; i < 3; ++i) {
    const double freq = static_cast<double>(out.counts[i]) / n;
    EXPECT_LT(std::abs(freq - w[i]), 4.0 * std::sqrt(w[i] * (1 - w[i]) / n));
  }
}

TEST(Multinomial, ConsumesNUniformsInDrawOrder) {
  const std::vector<double> w{0.25, 0.25, 0.5};
  RandomStream s(4, 2);
  RandomStream copy(4, 2);
  const auto out = multinomial_resample(indexed(w), 6, s);
  const auto u = uniform_draws(copy, 6);
  for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(out.indices[j], oracle::scan_inverse_cdf(w, u[j]));
  EXPECT_EQ(s.uniform(), copy.uniform());
}

TEST(Residual, DeterministicCases) {
  RandomStream s(1, 0);
  EXPECT_EQ(residual_resample(indexed({0.5, 0.5}), 4, s).counts, (Counts{2, 2}));
  EXPECT_EQ(residual_resample(indexed({0.75, 0.25}), 4, s).counts, (Counts{3, 1}));

  const std::vector<double> w{0.6, 0.4};
  const auto d = decompose_residual(w, 5);
  EXPECT_EQ(d.deterministic_counts, (Counts{3, 2}));
  EXPECT_EQ(d.deterministic_total, 5u);
  EXPECT_EQ(d.random_draws(), 0u);
  EXPECT_EQ(uniforms_required(Scheme::residual, w, 5), 0u);
  RandomStream a(3, 0);
  RandomStream b(3, 0);
  EXPECT_EQ(residual_resample(indexed(w), 5, a).counts, (Counts{3, 2}));
  EXPECT_EQ(a.uniform(), b.uniform());  // no draws consumed
}

TEST(Residual, Decomposition) {
  const std::vector<double> w{0.6, 0.4};
  const auto d = decompose_residual(w, 4);
  EXPECT_EQ(d.deterministic_counts, (Counts{2, 1}));
  EXPECT_EQ(d.random_draws(), 1u);
  ASSERT_EQ(d.residual_weights.size(), 2u);
  EXPECT_NEAR(d.residual_weights[0], 0.4, 1e-12);
  EXPECT_NEAR(d.residual_weights[1], 0.6, 1e-12);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto wr = oracle::random_weights(seed, 6, true);
    const std::size_t n = 3 + seed % 9;
    const auto dr = decompose_residual(wr, n);
    const auto expected = oracle::residual_weights(wr, n);
    EXPECT_EQ(dr.deterministic_counts, oracle::floor_counts(wr, n));
    for (std::size_t i = 0; i < wr.size(); ++i) {
      const double lhs = n * wr[i] - std::floor(n * wr[i]);
      EXPECT_NEAR(lhs, static_cast<double>(dr.random_draws()) * dr.residual_weights[i], 1e-12);
      EXPECT_NEAR(dr.residual_weights[i], expected[i], 1e-12);
    }
  }
}

TEST(Residual, DeterministicPartFirst) {
  const std::vector<double> w{0.45, 0.1, 0.45};
  RandomStream s(8, 0);
  const auto out = residual_resample(indexed(w), 4, s);
  expect_consistent(out, 3, 4);
  EXPECT_EQ(out.indices[0], 0u);
  EXPECT_EQ(out.indices[1], 2u);
  EXPECT_GE(out.counts[0], 1u);
  EXPECT_GE(out.counts[2], 1u);
}

TEST(Stratified, EqualWeightsOneEach) {
  for (std::size_t n : {4u, 8u, 16u}) {
    RandomStream s(n, 0);
    const auto out = stratified_resample(indexed(std::vector<double>(n, 1.0)), n, s);
    EXPECT_EQ(out.counts, Counts(n, 1));
  }
}

TEST(Stratified, TwoEqualWeights) {
  const auto dist = count_distribution(Scheme::stratified, {0.5, 0.5}, 2);
  ASSERT_EQ(dist.size(), 1u);
  EXPECT_NEAR(dist.at({1, 1}), 1.0, 1e-15);
}

TEST(Stratified, ExactDistribution) {
  const auto dist = count_distribution(Scheme::stratified, {0.75, 0.25}, 2);
  ASSERT_EQ(dist.size(), 2u);
  EXPECT_NEAR(dist.at({2, 0}), 0.5, 1e-15);
  EXPECT_NEAR(dist.at({1, 1}), 0.5, 1e-15);
}

TEST(Stratified, StratumOrder) {
  const std::vector<double> w{0.1, 0.3, 0.2, 0.4};
  RandomStream s(5, 0);
  RandomStream copy(5, 0);
  const auto out = stratified_resample(indexed(w), 5, s);
  const auto u = uniform_draws(copy, 5);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(out.indices[k], oracle::scan_inverse_cdf(w, (k + u[k]) / 5.0));
  }
}

TEST(Systematic, SingleParticle) {
  RandomStream s(2, 0);
  EXPECT_EQ(systematic_resample(indexed({1.0}), 3, s).counts, Counts{3});
}

TEST(Systematic, TwoEqualWeightsEveryU) {
  const std::vector<double> w{0.5, 0.5};
  for (int j = 1; j <= 1000; ++j) {
    EXPECT_EQ(systematic_from_uniform(w, 2, j / 1000.0).counts, (Counts{1, 1}));
  }
}

TEST(Systematic, CounterExampleScan) {
  const auto system = make_counterexample({});
  const std::vector<double> w(system.weights().begin(), system.weights().end());
  const auto dist = count_distribution(Scheme::systematic, w, 4);
  std::map<std::size_t, double> on_x1;
  for (const auto& [counts, p] : dist) on_x1[counts[1] + counts[3]] += p;
  ASSERT_EQ(on_x1.size(), 2u);
  EXPECT_NEAR(on_x1.at(2), 0.5, 1e-15);
  EXPECT_NEAR(on_x1.at(4), 0.5, 1e-15);
}

TEST(Systematic, ConsumesOneUniform) {
  const std::vector<double> w = oracle::random_weights(3, 10);
  RandomStream s(6, 1);
  RandomStream copy(6, 1);
  const auto out = systematic_resample(indexed(w), 25, s);
  const double u = copy.uniform();
  EXPECT_EQ(out.counts, systematic_from_uniform(w, 25, u).counts);
  EXPECT_EQ(s.uniform(), copy.uniform());
  EXPECT_EQ(uniforms_required(Scheme::systematic, w, 25), 1u);
}

TEST(Systematic, BreakpointsAtMostM) {
  const std::vector<double> w = oracle::random_weights(12, 6);
  const std::size_t n = 7;
  Counts previous;
  int changes = 0;
  for (int j = 1; j <= 20000; ++j) {
    const auto counts = systematic_from_uniform(w, n, j / 20000.0).counts;
    if (!previous.empty() && counts != previous) ++changes;
    previous = counts;
  }
  EXPECT_LE(changes, static_cast<int>(w.size()));
}

TEST(ResidualStratified, MatchesResidualWhenDeterministic) {
  RandomStream a(1, 0);
  RandomStream b(1, 0);
  const auto sys = indexed({0.25, 0.25, 0.5});
  EXPECT_EQ(residual_stratified_resample(sys, 8, a).indices, residual_resample(sys, 8, b).indices);
}

TEST(ResidualStratified, ExactOneStratum) {
  const auto dist = count_distribution(Scheme::residual_stratified, {0.6, 0.4}, 4);
  ASSERT_EQ(dist.size(), 2u);
  EXPECT_NEAR(dist.at({3, 1}), 0.4, 1e-12);
  EXPECT_NEAR(dist.at({2, 2}), 0.6, 1e-12);
}

TEST(AllSchemes, CountsConsistentAndBounded) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto w = oracle::random_weights(seed, 9, true);
    const auto sys = indexed(w);
    const std::size_t n = 1 + seed % 13;
    for (Scheme scheme : kAllSchemes) {
      RandomStream s(seed, 7);
      const auto out = resample(scheme, sys, n, s);
      expect_consistent(out, w.size(), n);
      const auto floors = oracle::floor_counts(w, n);
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] == 0.0) EXPECT_EQ(out.counts[i], 0u);
        const double gap = std::abs(static_cast<double>(out.counts[i]) - n * w[i]);
        if (scheme == Scheme::systematic) EXPECT_LT(gap, 1.0 + 1e-12);
        if (scheme == Scheme::stratified) EXPECT_LT(gap, 2.0 + 1e-12);
        if (scheme == Scheme::residual || scheme == Scheme::residual_stratified) {
          EXPECT_GE(out.counts[i], floors[i]);
        }
        if (scheme == Scheme::residual_stratified) EXPECT_LT(gap, 2.0 + 1e-12);
      }
    }
  }
}

// Only systematic resampling keeps every count within one of n w_i. A particle
// whose interval spans parts of three strata can take three offspring under
// stratified sampling, and residual draws can pile onto a single particle.
TEST(CountBounds, StratifiedAndResidualCanDeviateByMoreThanOne) {
  // In stratum units particle 1 covers (0.5, 2.1).
  const std::vector<double> w{0.5 / 3, 1.6 / 3, 0.9 / 3};
  const auto stratified = count_distribution(Scheme::stratified, w, 3);
  double p_three = 0.0;
  for (const auto& [counts, p] : stratified) {
    if (counts[1] == 3) p_three += p;
  }
  EXPECT_NEAR(p_three, 0.5 * 0.1, 1e-12);  // 3 - 1.6 = 1.4

  const std::vector<double> v{0.45, 0.1, 0.45};
  const auto residual = count_distribution(Scheme::residual, v, 2);
  EXPECT_NEAR(residual.at({0, 2, 0}), 0.01, 1e-12);  // 2 - 0.2 = 1.8

  for (const auto& [counts, p] : count_distribution(Scheme::systematic, w, 3)) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      EXPECT_LT(std::abs(static_cast<double>(counts[i]) - 3 * w[i]), 1.0);
    }
  }
}

TEST(FromUniforms, RejectsBadUniforms) {
  const std::vector<double> w{0.5, 0.5};
  EXPECT_THROW(systematic_from_uniform(w, 2, 0.0), OutOfRange);
  EXPECT_THROW(multinomial_from_uniforms(w, std::vector<double>{0.5, 1.5}), OutOfRange);
  EXPECT_THROW(resample_from_uniforms(Scheme::stratified, w, 3, std::vector<double>{0.5}),
               InvalidConfig);
}

TEST(ApplyResample, CopiesAncestors) {
  const auto sys = ParticleSystem::scalar({7.0, 9.0}, std::vector<double>{0.3, 0.7});
  ResampleOutput out{{0, 0}, {2, 0}};
  const auto next = apply_resample(sys, out);
  ASSERT_EQ(next.size(), 2u);
  EXPECT_EQ(next.position(0)[0], 7.0);
  EXPECT_EQ(next.position(1)[0], 7.0);
  EXPECT_DOUBLE_EQ(next.weight(0), 0.5);
  EXPECT_DOUBLE_EQ(next.weight(1), 0.5);
}

TEST(ApplyResample, SingleOffspringAndOrder) {
  const auto sys = ParticleSystem::scalar({1.0, 2.0, 3.0}, std::vector<double>{1, 1, 1});
  EXPECT_EQ(apply_resample(sys, {{2}, {0, 0, 1}}).size(), 1u);
  const auto permuted = apply_resample(sys, {{2, 0, 1}, {1, 1, 1}});
  EXPECT_EQ(permuted.position(0)[0], 3.0);
  EXPECT_EQ(permuted.position(1)[0], 1.0);
  EXPECT_EQ(permuted.position(2)[0], 2.0);
}

TEST(ApplyResample, OutOfBoundsIndex) {
  const auto sys = ParticleSystem::scalar({1.0, 2.0}, std::vector<double>{1, 1});
  EXPECT_THROW(apply_resample(sys, {{0, 5}, {1, 0}}), std::out_of_range);
}
