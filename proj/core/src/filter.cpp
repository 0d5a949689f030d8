#include "resample_lab/filter.hpp"

#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "resample_lab/errors.hpp"
#include "resample_lab/serialization.hpp"

namespace resample_lab {
namespace {

struct WeightedStep {
  ParticleSystem system;
  double log_normalizer_increment;
};

void check_state(const State& x, std::size_t dimension) {
  if (x.size() != dimension) throw InvalidConfig("sampler returned a state of the wrong dimension");
}

double checked_weight(double w) {
  if (!std::isfinite(w) || w < 0.0) throw InvalidWeight("model produced a negative or non-finite weight");
  return w;
}

WeightedStep initialize(const StateSpaceModel& model, std::size_t m, RandomStream& stream) {
  if (m == 0) throw InvalidConfig("the filter needs at least one particle");
  if (!model.initial_sampler || !model.initial_weight) {
    throw InvalidConfig("model lacks an initial sampler or weight");
  }
  std::vector<double> coordinates;
  coordinates.reserve(m * model.dimension);
  std::vector<double> raw(m);
  for (std::size_t i = 0; i < m; ++i) {
    const State x = model.initial_sampler(stream);
    check_state(x, model.dimension);
    raw[i] = checked_weight(model.initial_weight(x));
    coordinates.insert(coordinates.end(), x.begin(), x.end());
  }
  double total = 0.0;
  for (double w : raw) total += w;
  ParticleSystem system(model.dimension, std::move(coordinates), raw);
  return {std::move(system), std::log(total / static_cast<double>(m))};
}

WeightedStep propagate(const ParticleSystem& system, const StateSpaceModel& model, std::size_t k,
                       RandomStream& stream) {
  const bool bootstrap = model.bootstrap();
  const auto& sampler = bootstrap ? model.transition_sampler : model.proposal_sampler;
  if (!sampler) throw InvalidConfig("model lacks a transition sampler");
  if (bootstrap ? !model.likelihood : !model.weight_ratio) {
    throw InvalidConfig("model lacks a likelihood or weight ratio");
  }

  const std::size_t count = system.size();
  const bool uniform = system.equally_weighted();
  std::vector<double> coordinates;
  coordinates.reserve(count * model.dimension);
  std::vector<double> raw(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto previous = system.position(i);
    const State x = sampler(previous, k, stream);
    check_state(x, model.dimension);
    const double ratio =
        checked_weight(bootstrap ? model.likelihood(x, k) : model.weight_ratio(previous, x, k));
    raw[i] = uniform ? ratio : system.weight(i) * ratio;
    coordinates.insert(coordinates.end(), x.begin(), x.end());
  }
  double total = 0.0;
  for (double w : raw) total += w;
  const double increment = uniform ? std::log(total / static_cast<double>(count)) : std::log(total);
  ParticleSystem next(model.dimension, std::move(coordinates), raw);
  return {std::move(next), increment};
}

TraceRow make_row(std::size_t k, const WeightedStep& step, std::span<const TestFunction> functions) {
  TraceRow row;
  row.k = k;
  row.estimates.reserve(functions.size());
  for (const auto& f : functions) row.estimates.push_back(weighted_mean(step.system, f));
  row.ess = effective_sample_size(step.system.weights());
  row.log_normalizer_increment = step.log_normalizer_increment;
  row.population = step.system.size();
  return row;
}

}  // namespace

RandomStream propagation_stream(const RandomStream& base, std::size_t k) {
  return base.derive(2 * static_cast<std::uint64_t>(k));
}

RandomStream resampling_stream(const RandomStream& base, std::size_t k) {
  return base.derive(2 * static_cast<std::uint64_t>(k) + 1);
}

ParticleSystem sisr_init(const StateSpaceModel& model, std::size_t m, RandomStream& stream) {
  return initialize(model, m, stream).system;
}

ParticleSystem sisr_step(const ParticleSystem& system, const StateSpaceModel& model,
                         std::size_t k, RandomStream& stream) {
  return propagate(system, model, k, stream).system;
}

BootstrapStepResult bootstrap_step(const ParticleSystem& system, const StateSpaceModel& model,
                                   std::size_t k, std::size_t n, Scheme scheme,
                                   std::span<const TestFunction> functions,
                                   const RandomStream& base) {
  if (!system.equally_weighted()) {
    throw InvalidConfig("bootstrap_step expects an equally weighted population");
  }
  StateSpaceModel bootstrap_model = model;
  bootstrap_model.proposal_sampler = nullptr;

  RandomStream moves = propagation_stream(base, k);
  const WeightedStep step = propagate(system, bootstrap_model, k, moves);
  TraceRow row = make_row(k, step, functions);

  RandomStream draws = resampling_stream(base, k);
  ParticleSystem resampled = apply_resample(step.system, resample(scheme, step.system, n, draws));
  row.resampled = true;
  return {std::move(resampled), std::move(row)};
}

FilterTrace run_filter(const StateSpaceModel& model, const FilterConfig& config,
                       std::span<const TestFunction> functions, const RandomStream& base) {
  if (config.m == 0 || config.n == 0) throw InvalidConfig("m and n must be at least 1");
  FilterTrace trace;
  for (const auto& f : functions) trace.function_names.push_back(f.name());
  if (config.horizon == 0) return trace;

  std::optional<ParticleSystem> current;
  for (std::size_t k = 0; k < config.horizon; ++k) {
    try {
      RandomStream moves = propagation_stream(base, k);
      WeightedStep step =
          k == 0 ? initialize(model, config.m, moves) : propagate(*current, model, k, moves);
      TraceRow row = make_row(k, step, functions);
      const bool resample_now =
          config.resample_every > 0 && (k + 1) % config.resample_every == 0;
      if (resample_now) {
        RandomStream draws = resampling_stream(base, k);
        current = apply_resample(step.system, resample(config.scheme, step.system, config.n, draws));
      } else {
        current = std::move(step.system);
      }
      row.resampled = resample_now;
      trace.rows.push_back(std::move(row));
    } catch (const FilterStepError&) {
      throw;
    } catch (const DegenerateWeights& e) {
      throw FilterStepError(k, e.what());
    }
  }
  return trace;
}

std::vector<double> read_observations(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidConfig("observation file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "k,y") throw InvalidConfig("observation file must start with header 'k,y'");
  std::vector<double> out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = parse_number_list(line);
    if (fields.size() != 2) throw InvalidConfig("observation row needs two fields: '" + line + "'");
    if (fields[0] != static_cast<double>(out.size())) {
      throw InvalidConfig("observation rows must be numbered 0, 1, 2, ...");
    }
    out.push_back(fields[1]);
  }
  return out;
}

void write_observations(std::ostream& out, std::span<const double> observations) {
  out << "k,y\n";
  for (std::size_t k = 0; k < observations.size(); ++k) {
    out << k << ',' << format_number(observations[k]) << '\n';
  }
}

std::string trace_csv(const FilterTrace& trace) {
  std::ostringstream out;
  out << 'k';
  for (const auto& name : trace.function_names) out << ",estimate_" << name;
  out << ",ess,resampled\n";
  for (const auto& row : trace.rows) {
    out << row.k;
    for (double e : row.estimates) out << ',' << format_number(e);
    out << ',' << format_number(row.ess) << ',' << (row.resampled ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string trace_json(const FilterTrace& trace) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : trace.rows) {
    nlohmann::ordered_json r;
    r["k"] = row.k;
    for (std::size_t j = 0; j < row.estimates.size(); ++j) {
      r["estimate_" + trace.function_names[j]] = row.estimates[j];
    }
    r["ess"] = row.ess;
    r["resampled"] = row.resampled;
    r["log_normalizer_increment"] = row.log_normalizer_increment;
    r["population"] = row.population;
    rows.push_back(std::move(r));
  }
  return rows.dump(2) + "\n";
}

}  // namespace resample_lab
