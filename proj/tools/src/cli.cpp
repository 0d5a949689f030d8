#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "resample_lab/asymptotics.hpp"
#include "resample_lab/counterexample.hpp"
#include "resample_lab/errors.hpp"
#include "resample_lab/filter.hpp"
#include "resample_lab/kalman.hpp"
#include "resample_lab/linear_gaussian.hpp"
#include "resample_lab/particle_system.hpp"
#include "resample_lab/random_stream.hpp"
#include "resample_lab/resampling.hpp"
#include "resample_lab/serialization.hpp"
#include "resample_lab/variance.hpp"
#include "resample_lab/version.hpp"

namespace resample_lab::cli {
namespace {

using Json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr const char* kSeedVariable = "RESAMPLE_LAB_SEED";

// Flags shared by every command. --threads is deliberately left out of the
// metadata: it never changes the numbers, and leaving it out keeps outputs
// byte-identical across thread counts.
struct Common {
  std::uint64_t seed = 0;
  CLI::Option* seed_option = nullptr;
  std::string output;
  std::string format = "csv";
  std::size_t threads = 1;
};

void add_common(CLI::App* app, Common& c, bool seeded = true) {
  if (seeded) {
    c.seed_option =
        app->add_option("--seed", c.seed, std::string("Random seed; falls back to ") + kSeedVariable);
  }
  app->add_option("--output", c.output, "Output file (stdout when omitted)");
  app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
}

std::uint64_t resolve_seed(const Common& c) {
  if (c.seed_option != nullptr && c.seed_option->count() > 0) return c.seed;
  const char* env = std::getenv(kSeedVariable);
  if (env == nullptr || *env == '\0') return 0;
  std::uint64_t seed = 0;
  const std::string_view text(env);
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw UsageError(std::string(kSeedVariable) + " is not an unsigned integer: '" + env + "'");
  }
  return seed;
}

Scheme scheme_from(const std::string& name) {
  if (auto s = try_parse_scheme(name)) return *s;
  throw UsageError("unknown scheme '" + name + "'; valid schemes: " + valid_scheme_names());
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw UsageError("cannot open '" + path + "' for writing");
  file << body;
  if (!file) throw UsageError("failed writing '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw UsageError("cannot read '" + path + "'");
  std::ostringstream text;
  text << file.rdbuf();
  return text.str();
}

// Writes the result body, plus `<output>.meta.json` echoing everything needed
// to rerun the command when the result goes to a file.
void emit(const Common& c, std::string_view command, std::uint64_t seed, const std::string& body,
          Json config, Json results, std::ostream& out) {
  if (c.output.empty()) {
    out << body;
    return;
  }
  write_file(c.output, body);
  Json meta;
  meta["command"] = command;
  meta["version"] = kVersion;
  meta["seed"] = seed;
  meta["format"] = c.format;
  meta["config"] = std::move(config);
  if (!results.is_null()) meta["results"] = std::move(results);
  write_file(c.output + ".meta.json", meta.dump(2) + "\n");
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::vector<double> read_weight_file(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<double> weights;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto values = parse_number_list(line.substr(first));
    if (values.size() != 1) throw UsageError("weights file '" + path + "': one weight per line");
    weights.push_back(values[0]);
  }
  return weights;
}

std::vector<double> load_weights(const std::string& inline_weights, const std::string& path) {
  if (!inline_weights.empty() && !path.empty()) {
    throw UsageError("give either --weights or --weights-file, not both");
  }
  if (!path.empty()) return read_weight_file(path);
  if (inline_weights.empty()) throw UsageError("weights are required (--weights or --weights-file)");
  return parse_number_list(inline_weights);
}

ParticleSystem indexed_system(std::span<const double> raw) {
  std::vector<double> positions(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) positions[i] = static_cast<double>(i);
  return ParticleSystem::scalar(std::move(positions), raw);
}

std::vector<std::size_t> parse_grid(const std::string& text, const char* what) {
  std::vector<std::size_t> grid;
  for (double v : parse_number_list(text)) {
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e12) {
      throw UsageError(std::string(what) + " entries must be positive integers");
    }
    grid.push_back(static_cast<std::size_t>(v));
  }
  return grid;
}

TestFunction function_from(const std::string& name) {
  if (name == "one") return TestFunction("one", [](std::span<const double>) { return 1.0; }, 1.0);
  if (name == "zero") return TestFunction("zero", [](std::span<const double>) { return 0.0; }, 0.0);
  if (name == "x") return TestFunction("x", [](std::span<const double> s) { return s[0]; });
  if (name == "x2") return TestFunction("x2", [](std::span<const double> s) { return s[0] * s[0]; });
  throw UsageError("unknown function '" + name + "'; valid functions: one, zero, x, x2");
}

DensityPair pair_from(const std::string& name, double alpha) {
  if (name == "reference") return reference_pair(alpha);
  if (name == "flat") return flat_pair(alpha);
  throw UsageError("unknown pair '" + name + "'; valid pairs: reference, flat");
}

Json json_grid(std::span<const std::size_t> grid) { return Json(std::vector<std::size_t>(grid.begin(), grid.end())); }

// ---------------------------------------------------------------- resample

struct ResampleArgs {
  Common common;
  std::string scheme;
  std::string weights;
  std::string weights_file;
  std::size_t n = 0;
};

void add_resample(CLI::App& app, ResampleArgs& a) {
  auto* sub = app.add_subcommand("resample", "Resample a weighted particle system once");
  sub->add_option("--scheme", a.scheme, "Resampling scheme")->required();
  sub->add_option("--weights", a.weights, "Comma-separated weights");
  sub->add_option("--weights-file", a.weights_file, "File with one weight per line");
  sub->add_option("--n", a.n, "Offspring count (defaults to the number of weights)");
  add_common(sub, a.common);
}

void cmd_resample(const ResampleArgs& a, std::ostream& out) {
  const Scheme scheme = scheme_from(a.scheme);
  const std::uint64_t seed = resolve_seed(a.common);
  const std::vector<double> raw = load_weights(a.weights, a.weights_file);
  const ParticleSystem system = indexed_system(raw);
  const std::size_t n = a.n == 0 ? system.size() : a.n;

  RandomStream stream(seed, 0);
  const ResampleOutput result = resample(scheme, system, n, stream);

  std::string body;
  if (a.common.format == "json") {
    Json j;
    j["scheme"] = scheme_name(scheme);
    j["n"] = n;
    j["indices"] = result.indices;
    j["counts"] = result.counts;
    body = j.dump(2) + "\n";
  } else {
    std::ostringstream csv;
    csv << "kind,position,value\n";
    for (std::size_t j = 0; j < result.indices.size(); ++j) {
      csv << "index," << j << ',' << result.indices[j] << '\n';
    }
    for (std::size_t i = 0; i < result.counts.size(); ++i) {
      csv << "count," << i << ',' << result.counts[i] << '\n';
    }
    body = csv.str();
  }

  Json config;
  config["scheme"] = scheme_name(scheme);
  config["n"] = n;
  config["m"] = system.size();
  config["weights"] = raw;
  emit(a.common, "resample", seed, body, std::move(config), nullptr, out);
}

// ---------------------------------------------------------------- variance

struct VarianceArgs {
  Common common;
  std::string weights;
  std::string weights_file;
  std::string f_values;
  std::string counterexample;
  std::size_t n = 0;
  std::size_t replicates = 10000;
};

void add_variance(CLI::App& app, VarianceArgs& a) {
  auto* sub = app.add_subcommand("variance", "Conditional variance of every scheme on one system");
  sub->add_option("--weights", a.weights, "Comma-separated weights");
  sub->add_option("--weights-file", a.weights_file, "File with one weight per line");
  sub->add_option("--f-values", a.f_values, "Comma-separated f at each particle");
  sub->add_option("--counterexample", a.counterexample,
                  "Two-value system instead of weights, e.g. omega=0.75,n=4");
  sub->add_option("--n", a.n, "Offspring count");
  sub->add_option("--replicates", a.replicates, "Monte Carlo replicates")->check(CLI::Range(2, 1 << 30));
  add_common(sub, a.common);
}

CounterExampleConfig parse_counterexample(const std::string& text) {
  CounterExampleConfig config;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("counterexample entries look like key=value");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "ordering") {
      const auto ordering = try_parse_ordering(value);
      if (!ordering) throw UsageError("unknown ordering '" + value + "'");
      config.ordering = *ordering;
      continue;
    }
    const auto numbers = parse_number_list(value);
    if (numbers.size() != 1) throw UsageError("bad value for counterexample key '" + key + "'");
    const double v = numbers[0];
    if (key == "omega") {
      config.omega = v;
    } else if (key == "n") {
      if (!(v >= 0.0) || v != std::floor(v)) throw UsageError("counterexample n must be an integer");
      config.n = static_cast<std::size_t>(v);
    } else if (key == "x0") {
      config.x0 = v;
    } else if (key == "x1") {
      config.x1 = v;
    } else if (key == "f0") {
      config.f0 = v;
    } else if (key == "f1") {
      config.f1 = v;
    } else if (key == "seed") {
      config.permutation_seed = static_cast<std::uint64_t>(v);
    } else {
      throw UsageError("unknown counterexample key '" + key + "'");
    }
  }
  validate(config);
  return config;
}

Json counterexample_json(const CounterExampleConfig& c) {
  Json j;
  j["n"] = c.n;
  j["omega"] = c.omega;
  j["x0"] = c.x0;
  j["x1"] = c.x1;
  j["f0"] = c.f0;
  j["f1"] = c.f1;
  j["ordering"] = ordering_name(c.ordering);
  j["permutation_seed"] = c.permutation_seed;
  return j;
}

Json analytic_json(const CounterExampleVariances& v) {
  Json j;
  j["multinomial"] = v.multinomial;
  j["residual_stratified"] = v.residual_stratified;
  j["systematic"] = v.systematic;
  return j;
}

std::vector<VarianceReport> all_scheme_reports(const ParticleSystem& system,
                                               std::span<const double> f, std::size_t n,
                                               std::size_t replicates, std::uint64_t seed,
                                               std::size_t threads) {
  const RandomStream base(seed, 0);
  std::vector<VarianceReport> reports;
  for (std::size_t s = 0; s < kAllSchemes.size(); ++s) {
    reports.push_back(cond_var_mc(kAllSchemes[s], system, f, n, replicates, base.derive(s), threads));
  }
  return reports;
}

void cmd_variance(const VarianceArgs& a, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(a.common);
  Json config;
  Json results = nullptr;

  std::optional<ParticleSystem> system;
  std::vector<double> f;
  std::size_t n = a.n;
  if (!a.counterexample.empty()) {
    if (!a.weights.empty() || !a.weights_file.empty() || !a.f_values.empty()) {
      throw UsageError("--counterexample replaces --weights and --f-values");
    }
    const CounterExampleConfig ce = parse_counterexample(a.counterexample);
    system = make_counterexample(ce);
    f = counterexample_function(ce).evaluate(*system);
    if (n == 0) n = ce.n;
    config["counterexample"] = counterexample_json(ce);
    if (ce.ordering == Ordering::interleaved && n == ce.n) {
      results = Json::object();
      results["analytic"] = analytic_json(counterexample_analytic(ce));
    }
  } else {
    const std::vector<double> raw = load_weights(a.weights, a.weights_file);
    if (a.f_values.empty()) throw UsageError("--f-values is required with --weights");
    f = parse_number_list(a.f_values);
    if (f.size() != raw.size()) throw UsageError("--f-values and --weights differ in length");
    system = indexed_system(raw);
    if (n == 0) throw UsageError("--n is required");
    config["weights"] = raw;
    config["f_values"] = f;
  }
  config["n"] = n;
  config["replicates"] = a.replicates;

  const auto reports = all_scheme_reports(*system, f, n, a.replicates, seed, a.common.threads);
  const std::string body = a.common.format == "json" ? variance_reports_json(reports)
                                                     : variance_reports_csv(reports);
  emit(a.common, "variance", seed, body, std::move(config), std::move(results), out);
}

// ---------------------------------------------------------- counterexample

struct CounterExampleArgs {
  Common common;
  CounterExampleConfig config;
  std::string ordering = "interleaved";
  std::size_t replicates = 10000;
};

void add_counterexample(CLI::App& app, CounterExampleArgs& a) {
  auto* sub = app.add_subcommand("counterexample",
                                 "Two-value system where systematic resampling does not dominate");
  sub->add_option("--omega", a.config.omega, "Total weight on x1, in [1/2, 1)");
  sub->add_option("--n", a.config.n, "Even population size");
  sub->add_option("--ordering", a.ordering, "interleaved, blocked or permuted");
  sub->add_option("--permutation-seed", a.config.permutation_seed, "Shuffle seed for permuted");
  sub->add_option("--x0", a.config.x0);
  sub->add_option("--x1", a.config.x1);
  sub->add_option("--f0", a.config.f0, "f(x0)");
  sub->add_option("--f1", a.config.f1, "f(x1)");
  sub->add_option("--replicates", a.replicates, "Monte Carlo replicates")->check(CLI::Range(2, 1 << 30));
  add_common(sub, a.common);
}

void cmd_counterexample(CounterExampleArgs a, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(a.common);
  const auto ordering = try_parse_ordering(a.ordering);
  if (!ordering) throw UsageError("unknown ordering '" + a.ordering + "'; valid: interleaved, blocked, permuted");
  a.config.ordering = *ordering;
  validate(a.config);

  const ParticleSystem system = make_counterexample(a.config);
  const std::vector<double> f = counterexample_function(a.config).evaluate(system);
  const auto reports = all_scheme_reports(system, f, a.config.n, a.replicates, seed, a.common.threads);

  std::optional<CounterExampleVariances> analytic;
  if (a.config.ordering == Ordering::interleaved) analytic = counterexample_analytic(a.config);
  auto analytic_for = [&](Scheme s) -> std::optional<double> {
    if (!analytic) return std::nullopt;
    switch (s) {
      case Scheme::multinomial:
        return analytic->multinomial;
      case Scheme::residual:
      case Scheme::stratified:
        return analytic->residual_stratified;
      case Scheme::systematic:
        return analytic->systematic;
      case Scheme::residual_stratified:
        return std::nullopt;
    }
    return std::nullopt;
  };

  std::string body;
  if (a.common.format == "json") {
    Json rows = Json::array();
    for (const auto& r : reports) {
      Json j;
      j["scheme"] = scheme_name(r.scheme);
      j["n"] = r.n;
      j["analytic"] = optional_json(analytic_for(r.scheme));
      j["closed_form"] = optional_json(r.closed_form);
      j["exact_enumeration"] = optional_json(r.exact_enumeration);
      j["mc_estimate"] = r.mc_estimate;
      j["mc_stderr"] = r.mc_stderr;
      j["replicates"] = r.replicates;
      rows.push_back(std::move(j));
    }
    body = rows.dump(2) + "\n";
  } else {
    std::ostringstream csv;
    csv << "scheme,n,analytic,closed_form,exact_enumeration,mc_estimate,mc_stderr,replicates\n";
    for (const auto& r : reports) {
      csv << scheme_name(r.scheme) << ',' << r.n << ',' << format_optional(analytic_for(r.scheme))
          << ',' << format_optional(r.closed_form) << ',' << format_optional(r.exact_enumeration)
          << ',' << format_number(r.mc_estimate) << ',' << format_number(r.mc_stderr) << ','
          << r.replicates << '\n';
    }
    body = csv.str();
  }

  Json config = counterexample_json(a.config);
  config["replicates"] = a.replicates;
  Json results = nullptr;
  if (analytic) {
    results = Json::object();
    results["analytic"] = analytic_json(*analytic);
  }
  emit(a.common, "counterexample", seed, body, std::move(config), std::move(results), out);
}

// ------------------------------------------------------------------ filter

struct LinearGaussianSetup {
  LinearGaussianParams params;
  std::vector<double> observations;
  std::string observations_source = "builtin";
};

struct FilterArgs {
  Common common;
  std::string model;
  std::string config_file;
  std::string observations_file;
  std::string emit_observations;
  std::string scheme;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t resample_every = 1;
  std::size_t horizon = 0;
  CLI::Option* resample_every_option = nullptr;
  CLI::Option* horizon_option = nullptr;
};

void add_filter(CLI::App& app, FilterArgs& a) {
  auto* sub = app.add_subcommand("filter", "Run the bootstrap particle filter");
  sub->add_option("--model", a.model, "Model name (lingauss)")->required();
  sub->add_option("--config", a.config_file, "JSON file with model and filter settings");
  sub->add_option("--observations", a.observations_file, "Observation CSV with header k,y");
  sub->add_option("--emit-observations", a.emit_observations,
                  "Also write the observations in use to this CSV file");
  sub->add_option("--scheme", a.scheme, "Resampling scheme");
  sub->add_option("--m", a.m, "Particles at initialization");
  sub->add_option("--n", a.n, "Particles after resampling");
  a.resample_every_option =
      sub->add_option("--resample-every", a.resample_every, "Resampling period, 0 for never");
  a.horizon_option = sub->add_option("--horizon", a.horizon, "Number of time steps");
  add_common(sub, a.common);
}

template <typename T>
void take(const Json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

std::vector<double> load_observations(const std::string& path) {
  std::istringstream in(read_file(path));
  return read_observations(in);
}

void cmd_filter(const FilterArgs& a, std::ostream& out) {
  if (a.model != "lingauss") throw UsageError("unknown model '" + a.model + "'; valid models: lingauss");
  const std::uint64_t seed = resolve_seed(a.common);

  LinearGaussianParams params;
  FilterConfig fc;
  fc.m = 1000;
  fc.n = 0;
  std::string scheme = "systematic";
  std::optional<std::size_t> horizon;
  if (!a.config_file.empty()) {
    Json j;
    try {
      j = Json::parse(read_file(a.config_file));
      take(j, "a", params.a);
      take(j, "sigma_w", params.sigma_w);
      take(j, "sigma_v", params.sigma_v);
      take(j, "prior_mean", params.prior_mean);
      take(j, "prior_var", params.prior_var);
      take(j, "m", fc.m);
      take(j, "n", fc.n);
      take(j, "resample_every", fc.resample_every);
      take(j, "scheme", scheme);
      if (j.contains("horizon")) horizon = j.at("horizon").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("config '" + a.config_file + "': " + e.what());
    }
  }
  if (!a.scheme.empty()) scheme = a.scheme;
  if (a.m > 0) fc.m = a.m;
  if (a.n > 0) fc.n = a.n;
  if (a.resample_every_option->count() > 0) fc.resample_every = a.resample_every;
  if (a.horizon_option->count() > 0) horizon = a.horizon;
  if (fc.n == 0) fc.n = fc.m;
  fc.scheme = scheme_from(scheme);
  validate(params);

  const std::vector<double> observations = a.observations_file.empty()
                                               ? reference_observations(params)
                                               : load_observations(a.observations_file);
  fc.horizon = horizon.value_or(observations.size());
  if (fc.horizon > observations.size()) {
    throw UsageError("horizon " + std::to_string(fc.horizon) + " exceeds the " +
                     std::to_string(observations.size()) + " available observations");
  }
  if (!a.emit_observations.empty()) {
    std::ostringstream obs;
    write_observations(obs, observations);
    write_file(a.emit_observations, obs.str());
  }

  const StateSpaceModel model = make_linear_gaussian_model(params, observations);
  const TestFunction functions[] = {function_from("x")};
  const FilterTrace trace = run_filter(model, fc, functions, RandomStream(seed, 0));
  const std::string body = a.common.format == "json" ? trace_json(trace) : trace_csv(trace);

  Json config;
  config["model"] = a.model;
  config["a"] = params.a;
  config["sigma_w"] = params.sigma_w;
  config["sigma_v"] = params.sigma_v;
  config["prior_mean"] = params.prior_mean;
  config["prior_var"] = params.prior_var;
  config["observations"] = a.observations_file.empty() ? std::string("builtin") : a.observations_file;
  config["observation_count"] = observations.size();
  config["scheme"] = scheme_name(fc.scheme);
  config["m"] = fc.m;
  config["n"] = fc.n;
  config["resample_every"] = fc.resample_every;
  config["horizon"] = fc.horizon;
  emit(a.common, "filter", seed, body, std::move(config), nullptr, out);
}

// ------------------------------------------------------------- asymptotics

struct PairArgs {
  std::string pair = "reference";
  double alpha = 1.0;
  std::string function = "one";
};

void add_pair(CLI::App* sub, PairArgs& p) {
  sub->add_option("--pair", p.pair, "Density pair: reference (g = 2x) or flat (g = 1)");
  sub->add_option("--alpha", p.alpha, "Limit of n / m");
  sub->add_option("--f", p.function, "Test function: one, zero, x, x2");
}

Json pair_json(const PairArgs& p) {
  Json j;
  j["pair"] = p.pair;
  j["alpha"] = p.alpha;
  j["f"] = p.function;
  return j;
}

struct Lemma1Args {
  Common common;
  PairArgs pair;
  std::string m_grid = "10000,40000,100000";
  std::size_t replicates = 20;
};

struct KappaArgs {
  Common common;
  PairArgs pair{"reference", 1.0, "x"};
  std::string scheme = "residual";
  std::string n_grid;
  std::size_t replicates = 20;
};

struct CltArgs {
  Common common;
  std::string scheme = "multinomial";
  std::string function = "x";
  std::string observations_file;
  std::size_t k = 10;
  std::string n_grid = "500,2000,8000";
  std::size_t replicates = 500;
};

struct SupportArgs {
  Common common;
  PairArgs pair;
  std::size_t samples = kSupportSamples;
  double tolerance = kSupportTolerance;
};

struct AsymptoticsArgs {
  CLI::App* lemma1 = nullptr;
  CLI::App* kappa = nullptr;
  CLI::App* clt = nullptr;
  CLI::App* support = nullptr;
  Lemma1Args lemma1_args;
  KappaArgs kappa_args;
  CltArgs clt_args;
  SupportArgs support_args;
};

CLI::App* add_asymptotics(CLI::App& app, AsymptoticsArgs& a) {
  auto* sub = app.add_subcommand("asymptotics", "Large-sample experiments");
  sub->require_subcommand(1);

  a.lemma1 = sub->add_subcommand("lemma1", "Floor-weight sum against its quadrature limit");
  add_pair(a.lemma1, a.lemma1_args.pair);
  a.lemma1->add_option("--m-grid", a.lemma1_args.m_grid, "Comma-separated increasing m values");
  a.lemma1->add_option("--replicates", a.lemma1_args.replicates)->check(CLI::Range(2, 1 << 30));
  add_common(a.lemma1, a.lemma1_args.common);

  a.kappa = sub->add_subcommand("kappa", "Limit variance of residual resampling");
  add_pair(a.kappa, a.kappa_args.pair);
  a.kappa->add_option("--scheme", a.kappa_args.scheme, "Scheme for the scaled variance table");
  a.kappa->add_option("--n-grid", a.kappa_args.n_grid, "n values for the scaled variance table");
  a.kappa->add_option("--replicates", a.kappa_args.replicates)->check(CLI::Range(2, 1 << 30));
  add_common(a.kappa, a.kappa_args.common);

  a.clt = sub->add_subcommand("clt", "CLT scaling of the linear-Gaussian bootstrap filter");
  a.clt->add_option("--scheme", a.clt_args.scheme, "Resampling scheme");
  a.clt->add_option("--f", a.clt_args.function, "Test function: one, zero, x, x2");
  a.clt->add_option("--observations", a.clt_args.observations_file, "Observation CSV");
  a.clt->add_option("--k", a.clt_args.k, "Time index of the estimate");
  a.clt->add_option("--n-grid", a.clt_args.n_grid, "Comma-separated increasing n values");
  a.clt->add_option("--replicates", a.clt_args.replicates)->check(CLI::Range(3, 1 << 30));
  add_common(a.clt, a.clt_args.common);

  a.support = sub->add_subcommand("support", "Target mass near {x : alpha g(x) integer}");
  add_pair(a.support, a.support_args.pair);
  a.support->add_option("--samples", a.support_args.samples)->check(CLI::PositiveNumber);
  a.support->add_option("--tolerance", a.support_args.tolerance)->check(CLI::NonNegativeNumber);
  add_common(a.support, a.support_args.common);
  return sub;
}

void cmd_lemma1(const Lemma1Args& a, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(a.common);
  const DensityPair pair = pair_from(a.pair.pair, a.pair.alpha);
  const TestFunction f = function_from(a.pair.function);
  const auto grid = parse_grid(a.m_grid, "--m-grid");
  const LimitCheckResult r =
      lemma1_experiment(pair, f, grid, a.replicates, RandomStream(seed, 0), a.common.threads);
  const std::string body = a.common.format == "json" ? lemma1_json(r) : lemma1_csv(r);

  Json config = pair_json(a.pair);
  config["m_grid"] = json_grid(grid);
  config["replicates"] = a.replicates;
  Json results;
  results["target"] = r.target;
  results["support_violation_estimate"] = r.support_violation_estimate;
  emit(a.common, "asymptotics lemma1", seed, body, std::move(config), std::move(results), out);
}

void cmd_kappa(const KappaArgs& a, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(a.common);
  const DensityPair pair = pair_from(a.pair.pair, a.pair.alpha);
  const TestFunction f = function_from(a.pair.function);
  const Scheme scheme = scheme_from(a.scheme);
  const PairIntegrals integrals = integrate_pair(pair, f);
  const double residual = residual_kappa(pair, f);
  const double multinomial = multinomial_kappa(pair, f);

  Json config = pair_json(a.pair);
  Json results;
  results["residual_kappa"] = residual;
  results["multinomial_kappa"] = multinomial;
  results["support_mass"] = integrals.support_mass;
  results["quadrature_panels"] = integrals.panels;

  std::string body;
  if (a.n_grid.empty()) {
    if (a.common.format == "json") {
      Json j = pair_json(a.pair);
      j["residual_kappa"] = residual;
      j["multinomial_kappa"] = multinomial;
      body = j.dump(2) + "\n";
    } else {
      body = "pair,alpha,f,residual_kappa,multinomial_kappa\n" + a.pair.pair + ',' +
             format_number(a.pair.alpha) + ',' + a.pair.function + ',' + format_number(residual) +
             ',' + format_number(multinomial) + '\n';
    }
  } else {
    const auto grid = parse_grid(a.n_grid, "--n-grid");
    const auto rows = scaled_condvar_experiment(scheme, pair, f, grid, a.replicates,
                                                RandomStream(seed, 0), a.common.threads);
    body = a.common.format == "json" ? scaled_rows_json(rows) : scaled_rows_csv(rows);
    config["scheme"] = scheme_name(scheme);
    config["n_grid"] = json_grid(grid);
    config["replicates"] = a.replicates;
  }
  emit(a.common, "asymptotics kappa", seed, body, std::move(config), std::move(results), out);
}

void cmd_clt(const CltArgs& a, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(a.common);
  const Scheme scheme = scheme_from(a.scheme);
  const TestFunction f = function_from(a.function);
  const auto grid = parse_grid(a.n_grid, "--n-grid");
  const LinearGaussianParams params;
  const std::vector<double> observations = a.observations_file.empty()
                                               ? reference_observations(params)
                                               : load_observations(a.observations_file);
  if (a.k >= observations.size()) {
    throw UsageError("--k must be below the number of observations (" +
                     std::to_string(observations.size()) + ")");
  }
  const auto kalman = kalman_oracle(params, observations);
  const double reference = a.function == "x" ? kalman[a.k].mean
                           : a.function == "x2"
                               ? kalman[a.k].variance + kalman[a.k].mean * kalman[a.k].mean
                           : a.function == "one" ? 1.0
                                                 : 0.0;
  const StateSpaceModel model = make_linear_gaussian_model(params, observations);
  const CltReport report = clt_experiment(scheme, model, f, a.k, grid, a.replicates, reference,
                                          RandomStream(seed, 0), a.common.threads);
  const std::string body = a.common.format == "json" ? clt_json(report) : clt_csv(report);

  Json config;
  config["model"] = "lingauss";
  config["scheme"] = scheme_name(scheme);
  config["f"] = a.function;
  config["k"] = a.k;
  config["observations"] = a.observations_file.empty() ? std::string("builtin") : a.observations_file;
  config["n_grid"] = json_grid(grid);
  config["replicates"] = a.replicates;
  Json results;
  results["reference"] = reference;
  Json ratios = Json::array();
  for (const auto& row : report.rows) ratios.push_back(optional_json(row.ratio_to_previous));
  results["scaled_var_ratios"] = std::move(ratios);
  emit(a.common, "asymptotics clt", seed, body, std::move(config), std::move(results), out);
}

void cmd_support(const SupportArgs& a, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(a.common);
  const DensityPair pair = pair_from(a.pair.pair, a.pair.alpha);
  RandomStream stream(seed, 0);
  const double estimate = support_condition_estimate(pair, a.samples, a.tolerance, stream);

  std::string body;
  if (a.common.format == "json") {
    Json j;
    j["pair"] = a.pair.pair;
    j["alpha"] = a.pair.alpha;
    j["samples"] = a.samples;
    j["tolerance"] = a.tolerance;
    j["estimate"] = estimate;
    body = j.dump(2) + "\n";
  } else {
    body = "pair,alpha,samples,tolerance,estimate\n" + a.pair.pair + ',' +
           format_number(a.pair.alpha) + ',' + std::to_string(a.samples) + ',' +
           format_number(a.tolerance) + ',' + format_number(estimate) + '\n';
  }
  Json config;
  config["pair"] = a.pair.pair;
  config["alpha"] = a.pair.alpha;
  config["samples"] = a.samples;
  config["tolerance"] = a.tolerance;
  Json results;
  results["estimate"] = estimate;
  emit(a.common, "asymptotics support", seed, body, std::move(config), std::move(results), out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Resampling schemes for particle filters: variances, filters and limits",
               "resample_lab");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  ResampleArgs resample_args;
  VarianceArgs variance_args;
  CounterExampleArgs counterexample_args;
  FilterArgs filter_args;
  AsymptoticsArgs asymptotics_args;
  add_resample(app, resample_args);
  add_variance(app, variance_args);
  add_counterexample(app, counterexample_args);
  add_filter(app, filter_args);
  add_asymptotics(app, asymptotics_args);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand("resample")) {
      cmd_resample(resample_args, out);
    } else if (app.got_subcommand("variance")) {
      cmd_variance(variance_args, out);
    } else if (app.got_subcommand("counterexample")) {
      cmd_counterexample(counterexample_args, out);
    } else if (app.got_subcommand("filter")) {
      cmd_filter(filter_args, out);
    } else if (asymptotics_args.lemma1->parsed()) {
      cmd_lemma1(asymptotics_args.lemma1_args, out);
    } else if (asymptotics_args.kappa->parsed()) {
      cmd_kappa(asymptotics_args.kappa_args, out);
    } else if (asymptotics_args.clt->parsed()) {
      cmd_clt(asymptotics_args.clt_args, out);
    } else if (asymptotics_args.support->parsed()) {
      cmd_support(asymptotics_args.support_args, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DegenerateWeights& e) {
    err << "degenerate weights: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const DegenerateKappa& e) {
    err << "degenerate limit: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const SupportConditionViolated& e) {
    err << "support condition violated: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace resample_lab::cli
