#include "resample_lab/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "resample_lab/errors.hpp"
#include "resample_lab/quadrature.hpp"
#include "resample_lab/serialization.hpp"
#include "resample_lab/statistics.hpp"
#include "resample_lab/variance.hpp"

namespace resample_lab {
namespace {

constexpr std::uint64_t kSupportStreamKey = 0x5eed5b0dULL;

void check_grid(std::span<const std::size_t> grid, const char* what) {
  if (grid.empty()) throw InvalidConfig(std::string(what) + " grid is empty");
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (grid[j] == 0) throw InvalidConfig(std::string(what) + " grid entries must be positive");
    if (j > 0 && grid[j] <= grid[j - 1]) {
      throw InvalidConfig(std::string(what) + " grid must be strictly increasing");
    }
  }
}

std::size_t coupled_size(double value) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(value)));
}

double distance_to_integer(double v) { return std::abs(v - std::round(v)); }

// m draws from nu with normalized weights g / sum g and f at each draw.
struct WeightedSample {
  std::vector<double> weights;
  std::vector<double> f;
};

WeightedSample draw_weighted(const DensityPair& pair, const TestFunction& f, std::size_t m,
                             RandomStream& stream) {
  WeightedSample s;
  std::vector<double> raw(m);
  s.f.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double x = pair.nu_sampler(stream);
    raw[i] = pair.g(x);
    s.f[i] = f(x);
  }
  s.weights = normalize_weights(raw);
  return s;
}

void require_support(const DensityPair& pair, double mass) {
  if (mass > kSupportAbortThreshold) {
    throw SupportConditionViolated("pair '" + pair.name + "' with alpha = " +
                                   format_number(pair.alpha) + " puts mass " +
                                   format_number(mass) +
                                   " on {x : alpha g(x) is an integer}");
  }
}

}  // namespace

void validate(const DensityPair& pair) {
  if (!pair.nu_sampler || !pair.nu_density || !pair.g) {
    throw InvalidConfig("density pair is missing a sampler, density or ratio");
  }
  if (!(pair.alpha > 0.0)) throw InvalidConfig("alpha must be positive");
  if (!(pair.domain_hi > pair.domain_lo)) throw InvalidConfig("empty quadrature domain");
  if (!(pair.g_bound > 0.0) || !std::isfinite(pair.g_bound)) {
    throw InvalidConfig("g must have a finite positive upper bound");
  }
}

DensityPair reference_pair(double alpha) {
  DensityPair p;
  p.name = "reference";
  p.nu_sampler = [](RandomStream& s) { return s.uniform(); };
  p.nu_density = [](double x) { return x > 0.0 && x <= 1.0 ? 1.0 : 0.0; };
  p.g = [](double x) { return 2.0 * x; };
  p.g_bound = 2.0;
  p.alpha = alpha;
  return p;
}

DensityPair flat_pair(double alpha) {
  DensityPair p;
  p.name = "flat";
  p.nu_sampler = [](RandomStream& s) { return s.uniform(); };
  p.nu_density = [](double x) { return x > 0.0 && x <= 1.0 ? 1.0 : 0.0; };
  p.g = [](double) { return 1.0; };
  p.g_bound = 1.0;
  p.alpha = alpha;
  return p;
}

double floor_weight_sum(std::span<const double> weights, std::span<const double> f,
                        std::size_t n) {
  if (n == 0) throw InvalidConfig("n must be at least 1");
  if (weights.size() != f.size()) throw InvalidConfig("weights and f values differ in length");
  const double nd = static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) acc += std::floor(nd * weights[i]) * f[i];
  return acc / nd;
}

PairIntegrals integrate_pair(const DensityPair& pair, const TestFunction& f) {
  validate(pair);
  const double alpha = pair.alpha;
  const PieceLabel label = [&](double x) { return std::floor(alpha * pair.g(x)); };
  const Integrand integrand = [&](double x, std::span<double> out) {
    const double nu = pair.nu_density(x);
    const double g = pair.g(x);
    const double fx = f(x);
    const double floored = std::floor(alpha * g) / alpha;
    const double excess = g - floored;
    out[0] = nu * floored;
    out[1] = nu * floored * fx;
    out[2] = nu * excess * fx;
    out[3] = nu * excess * fx * fx;
    out[4] = nu * g * fx;
    out[5] = nu * g * fx * fx;
  };
  const RefinedIntegral r =
      integrate_refined(integrand, 6, label, pair.domain_lo, pair.domain_hi);

  const Integrand near_integer = [&](double x, std::span<double> out) {
    const double g = pair.g(x);
    out[0] = distance_to_integer(alpha * g) < kSupportTolerance ? pair.nu_density(x) * g : 0.0;
  };
  const auto support =
      integrate_piecewise(near_integer, 1, label, pair.domain_lo, pair.domain_hi, 1'000'000);

  PairIntegrals out;
  out.nu_floor = r.values[0];
  out.nu_floor_f = r.values[1];
  out.nu_excess_f = r.values[2];
  out.nu_excess_f2 = r.values[3];
  out.mu_f = r.values[4];
  out.mu_f2 = r.values[5];
  out.support_mass = support[0];
  out.panels = r.panels;
  out.refinement_change = r.last_change;
  return out;
}

double lemma1_target(const DensityPair& pair, const TestFunction& f) {
  return integrate_pair(pair, f).nu_floor_f;
}

double residual_kappa(const DensityPair& pair, const TestFunction& f) {
  const PairIntegrals I = integrate_pair(pair, f);
  require_support(pair, I.support_mass);
  const double denominator = 1.0 - I.nu_floor;
  if (denominator <= 1e-12) {
    throw DegenerateKappa("1 - nu{floor(alpha g) / alpha} vanishes; residual resampling is "
                          "asymptotically deterministic");
  }
  return I.nu_excess_f2 - I.nu_excess_f * I.nu_excess_f / denominator;
}

double multinomial_kappa(const DensityPair& pair, const TestFunction& f) {
  const PairIntegrals I = integrate_pair(pair, f);
  return I.mu_f2 - I.mu_f * I.mu_f;
}

double support_condition_estimate(const DensityPair& pair, std::size_t samples, double tolerance,
                                  RandomStream& stream) {
  validate(pair);
  if (samples == 0) throw InvalidConfig("support check needs at least one sample");
  double total = 0.0;
  double hit = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double g = pair.g(pair.nu_sampler(stream));
    total += g;
    if (distance_to_integer(pair.alpha * g) < tolerance) hit += g;
  }
  return total > 0.0 ? hit / total : 0.0;
}

LimitCheckResult lemma1_experiment(const DensityPair& pair, const TestFunction& f,
                                   std::span<const std::size_t> m_grid, std::size_t replicates,
                                   const RandomStream& stream, std::size_t threads) {
  validate(pair);
  check_grid(m_grid, "m");
  if (replicates < 2) throw InvalidConfig("lemma1 experiment needs at least two replicates");

  LimitCheckResult result;
  RandomStream check = stream.derive(kSupportStreamKey);
  result.support_violation_estimate =
      support_condition_estimate(pair, kSupportSamples, kSupportTolerance, check);
  require_support(pair, result.support_violation_estimate);

  result.target = lemma1_target(pair, f);
  result.replicates = replicates;
  for (std::size_t j = 0; j < m_grid.size(); ++j) {
    const std::size_t m = m_grid[j];
    const std::size_t n = coupled_size(pair.alpha * static_cast<double>(m));
    const RandomStream grid_stream = stream.derive(j);
    std::vector<double> values(replicates);
    parallel_for(replicates, threads, [&](std::size_t r) {
      RandomStream s = grid_stream.offset(r);
      const WeightedSample sample = draw_weighted(pair, f, m, s);
      values[r] = floor_weight_sum(sample.weights, sample.f, n);
    });
    result.m_grid.push_back(m);
    result.n_grid.push_back(n);
    result.estimates.push_back(mean(values));
    result.spreads.push_back(interquartile_range(values));
    result.standard_deviations.push_back(std::sqrt(sample_variance(values)));
  }
  return result;
}

std::vector<ScaledVarianceRow> scaled_condvar_experiment(Scheme scheme, const DensityPair& pair,
                                                         const TestFunction& f,
                                                         std::span<const std::size_t> n_grid,
                                                         std::size_t replicates,
                                                         const RandomStream& stream,
                                                         std::size_t threads) {
  validate(pair);
  check_grid(n_grid, "n");
  if (replicates < 2) throw InvalidConfig("scaled variance experiment needs at least two replicates");

  std::optional<double> target;
  if (scheme == Scheme::multinomial) target = multinomial_kappa(pair, f);
  if (scheme == Scheme::residual) target = residual_kappa(pair, f);

  std::vector<ScaledVarianceRow> rows;
  for (std::size_t j = 0; j < n_grid.size(); ++j) {
    const std::size_t n = n_grid[j];
    const std::size_t m = coupled_size(static_cast<double>(n) / pair.alpha);
    const RandomStream grid_stream = stream.derive(j);
    std::vector<double> values(replicates);
    parallel_for(replicates, threads, [&](std::size_t r) {
      RandomStream s = grid_stream.offset(r);
      const WeightedSample sample = draw_weighted(pair, f, m, s);
      const double var = scheme == Scheme::systematic
                             ? cond_var_systematic_exact(sample.weights, sample.f, n)
                             : *closed_form_variance(scheme, sample.weights, sample.f, n);
      values[r] = static_cast<double>(n) * var;
    });
    ScaledVarianceRow row;
    row.n = n;
    row.m = m;
    row.replicates = replicates;
    row.scaled_var = mean(values);
    row.scaled_var_stderr = std::sqrt(sample_variance(values) / static_cast<double>(replicates));
    row.target = target;
    rows.push_back(row);
  }
  return rows;
}

CltReport clt_experiment(Scheme scheme, const StateSpaceModel& model, const TestFunction& f,
                         std::size_t k, std::span<const std::size_t> n_grid,
                         std::size_t replicates, double reference, const RandomStream& stream,
                         std::size_t threads) {
  check_grid(n_grid, "n");
  if (replicates < 3) throw InvalidConfig("CLT experiment needs at least three replicates");

  CltReport report;
  report.reference = reference;
  const TestFunction functions[] = {f};
  for (std::size_t j = 0; j < n_grid.size(); ++j) {
    const std::size_t n = n_grid[j];
    FilterConfig config;
    config.m = n;
    config.n = n;
    config.scheme = scheme;
    config.resample_every = 1;
    config.horizon = k + 1;

    const RandomStream grid_stream = stream.derive(j);
    std::vector<double> estimates(replicates);
    parallel_for(replicates, threads, [&](std::size_t r) {
      const FilterTrace trace = run_filter(model, config, functions, grid_stream.offset(r));
      estimates[r] = trace.rows[k].estimates[0];
    });

    CltRow row;
    row.n = n;
    row.m = n;
    row.replicates = replicates;
    row.mean_error = mean(estimates) - reference;
    const VarianceEstimate v = variance_with_stderr(estimates);
    row.variance = v.value;
    row.scaled_var = static_cast<double>(n) * v.value;
    row.scaled_var_stderr = static_cast<double>(n) * v.standard_error;
    row.anderson_darling = anderson_darling_normal(estimates);
    if (!report.rows.empty()) row.ratio_to_previous = row.scaled_var / report.rows.back().scaled_var;
    row.estimates = std::move(estimates);
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string lemma1_csv(const LimitCheckResult& result) {
  std::ostringstream out;
  out << "m,n,replicates,estimate,iqr,target\n";
  for (std::size_t j = 0; j < result.m_grid.size(); ++j) {
    out << result.m_grid[j] << ',' << result.n_grid[j] << ',' << result.replicates << ','
        << format_number(result.estimates[j]) << ',' << format_number(result.spreads[j]) << ','
        << format_number(result.target) << '\n';
  }
  return out.str();
}

std::string scaled_rows_csv(std::span<const ScaledVarianceRow> rows) {
  std::ostringstream out;
  out << "n,m,replicates,scaled_var,scaled_var_stderr,target\n";
  for (const auto& r : rows) {
    out << r.n << ',' << r.m << ',' << r.replicates << ',' << format_number(r.scaled_var) << ','
        << format_number(r.scaled_var_stderr) << ',' << format_optional(r.target) << '\n';
  }
  return out.str();
}

std::string clt_csv(const CltReport& report) {
  std::ostringstream out;
  out << "n,m,replicates,scaled_var,scaled_var_stderr,target,mean_error,anderson_darling\n";
  for (const auto& r : report.rows) {
    out << r.n << ',' << r.m << ',' << r.replicates << ',' << format_number(r.scaled_var) << ','
        << format_number(r.scaled_var_stderr) << ",," << format_number(r.mean_error) << ','
        << format_number(r.anderson_darling) << '\n';
  }
  return out.str();
}

std::string lemma1_json(const LimitCheckResult& result) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t j = 0; j < result.m_grid.size(); ++j) {
    nlohmann::ordered_json r;
    r["m"] = result.m_grid[j];
    r["n"] = result.n_grid[j];
    r["replicates"] = result.replicates;
    r["estimate"] = result.estimates[j];
    r["iqr"] = result.spreads[j];
    r["target"] = result.target;
    rows.push_back(std::move(r));
  }
  return rows.dump(2) + "\n";
}

std::string scaled_rows_json(std::span<const ScaledVarianceRow> rows) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["n"] = r.n;
    j["m"] = r.m;
    j["replicates"] = r.replicates;
    j["scaled_var"] = r.scaled_var;
    j["scaled_var_stderr"] = r.scaled_var_stderr;
    j["target"] = r.target ? nlohmann::ordered_json(*r.target) : nlohmann::ordered_json(nullptr);
    out.push_back(std::move(j));
  }
  return out.dump(2) + "\n";
}

std::string clt_json(const CltReport& report) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    nlohmann::ordered_json j;
    j["n"] = r.n;
    j["m"] = r.m;
    j["replicates"] = r.replicates;
    j["scaled_var"] = r.scaled_var;
    j["scaled_var_stderr"] = r.scaled_var_stderr;
    j["target"] = nullptr;
    j["mean_error"] = r.mean_error;
    j["anderson_darling"] = r.anderson_darling;
    out.push_back(std::move(j));
  }
  return out.dump(2) + "\n";
}

}  // namespace resample_lab
