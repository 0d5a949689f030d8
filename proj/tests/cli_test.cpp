#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace fs = std::filesystem;
using resample_lab::cli::run;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream cells_in(line);
    std::string cell;
    while (std::getline(cells_in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("resample_lab_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ::unsetenv("RESAMPLE_LAB_SEED");
  }
  void TearDown() override {
    fs::remove_all(dir_);
    ::unsetenv("RESAMPLE_LAB_SEED");
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

const std::string kObservations = std::string(RESAMPLE_LAB_TEST_DATA_DIR) + "/lingauss_observations.csv";

}  // namespace

TEST_F(CliTest, ResidualCountsExample) {
  const auto r = invoke({"resample", "--scheme", "residual", "--weights", "0.5,0.5", "--n", "4",
                         "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows[0], (std::vector<std::string>{"kind", "position", "value"}));
  std::vector<std::string> counts;
  for (const auto& row : rows) {
    if (row[0] == "count") counts.push_back(row[2]);
  }
  EXPECT_EQ(counts, (std::vector<std::string>{"2", "2"}));
}

TEST_F(CliTest, UnknownSchemeListsValidNames) {
  const auto r = invoke({"resample", "--scheme", "bogus", "--weights", "0.5,0.5"});
  EXPECT_EQ(r.code, 2);
  for (const char* name : {"multinomial", "residual", "stratified", "systematic", "residual-stratified"}) {
    EXPECT_NE(r.err.find(name), std::string::npos) << name;
  }
}

TEST_F(CliTest, DegenerateWeightsExitThree) {
  EXPECT_EQ(invoke({"resample", "--scheme", "systematic", "--weights", "0,0"}).code, 3);
  EXPECT_EQ(invoke({"resample", "--scheme", "systematic", "--weights", "1,-1"}).code, 2);
}

TEST_F(CliTest, SameSeedSameFiles) {
  for (const char* name : {"a.csv", "b.csv"}) {
    ASSERT_EQ(invoke({"resample", "--scheme", "multinomial", "--weights", "0.1,0.2,0.3,0.4", "--n",
                      "50", "--seed", "9", "--output", path(name)})
                  .code,
              0);
  }
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_EQ(slurp(path("a.csv.meta.json")), slurp(path("b.csv.meta.json")));
  ASSERT_EQ(invoke({"resample", "--scheme", "multinomial", "--weights", "0.1,0.2,0.3,0.4", "--n",
                    "50", "--seed", "10", "--output", path("c.csv")})
                .code,
            0);
  EXPECT_NE(slurp(path("a.csv")), slurp(path("c.csv")));
}

TEST_F(CliTest, WeightsFile) {
  {
    std::ofstream f(path("w.txt"));
    f << "# weights\n0.5\n\n0.5\n";
  }
  const auto a = invoke({"resample", "--scheme", "residual", "--weights-file", path("w.txt"), "--n", "4"});
  const auto b = invoke({"resample", "--scheme", "residual", "--weights", "0.5,0.5", "--n", "4"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(invoke({"resample", "--scheme", "residual", "--weights-file", path("missing.txt")}).code, 2);
}

TEST_F(CliTest, SidecarEchoesConfig) {
  ASSERT_EQ(invoke({"resample", "--scheme", "stratified", "--weights", "0.2,0.8", "--n", "5", "--seed",
                    "17", "--output", path("r.csv")})
                .code,
            0);
  const auto meta = nlohmann::json::parse(slurp(path("r.csv.meta.json")));
  EXPECT_EQ(meta["command"], "resample");
  EXPECT_EQ(meta["seed"], 17);
  EXPECT_EQ(meta["format"], "csv");
  EXPECT_FALSE(meta["version"].get<std::string>().empty());
  EXPECT_EQ(meta["config"]["scheme"], "stratified");
  EXPECT_EQ(meta["config"]["n"], 5);
  EXPECT_EQ(meta["config"]["weights"], (std::vector<double>{0.2, 0.8}));
}

TEST_F(CliTest, EnvironmentSeedFallback) {
  const std::vector<std::string> base{"resample", "--scheme", "multinomial", "--weights", "0.3,0.3,0.4",
                                      "--n", "40"};
  auto with_seed = base;
  with_seed.insert(with_seed.end(), {"--seed", "123"});
  auto to_file = base;
  to_file.insert(to_file.end(), {"--output", path("env.csv")});
  ::setenv("RESAMPLE_LAB_SEED", "123", 1);
  const auto from_env = invoke(base);
  ASSERT_EQ(invoke(to_file).code, 0);
  ::unsetenv("RESAMPLE_LAB_SEED");
  EXPECT_EQ(from_env.out, invoke(with_seed).out);
  EXPECT_EQ(nlohmann::json::parse(slurp(path("env.csv.meta.json")))["seed"], 123);
  ::setenv("RESAMPLE_LAB_SEED", "abc", 1);
  EXPECT_EQ(invoke(base).code, 2);
}

TEST_F(CliTest, JsonFormat) {
  const auto r = invoke({"resample", "--scheme", "systematic", "--weights", "0.25,0.75", "--n", "4",
                         "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["counts"], (std::vector<int>{1, 3}));
  EXPECT_EQ(invoke({"resample", "--scheme", "systematic", "--weights", "1", "--format", "xml"}).code, 2);
}

TEST_F(CliTest, CounterexampleAnalyticValues) {
  const auto r = invoke({"variance", "--counterexample", "omega=0.75,n=4", "--replicates", "2000",
                         "--seed", "3", "--output", path("v.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto meta = nlohmann::json::parse(slurp(path("v.csv.meta.json")));
  const auto& analytic = meta["results"]["analytic"];
  EXPECT_NEAR(analytic["multinomial"].get<double>(), 0.25 * 0.75 / 4, 1e-15);
  EXPECT_NEAR(analytic["residual_stratified"].get<double>(), 0.5 * 0.25 / 4, 1e-15);
  EXPECT_NEAR(analytic["systematic"].get<double>(), 0.25 * 0.25, 1e-15);

  const auto rows = parse_csv(slurp(path("v.csv")));
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0][0], "scheme");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double exact = std::stod(rows[i][3]);
    if (rows[i][0] == "multinomial") {
      EXPECT_NEAR(exact, 0.046875, 1e-12);
    } else if (rows[i][0] == "systematic") {
      EXPECT_TRUE(rows[i][2].empty());
      EXPECT_NEAR(exact, 0.0625, 1e-12);
    } else {
      EXPECT_NEAR(exact, 0.03125, 1e-12);
      EXPECT_NEAR(std::stod(rows[i][2]), 0.03125, 1e-12);
    }
  }
}

TEST_F(CliTest, ConstantFunctionHasZeroVariance) {
  const auto r = invoke({"variance", "--weights", "0.1,0.6,0.3", "--f-values", "2,2,2", "--n", "7",
                         "--replicates", "100"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 6u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!rows[i][2].empty()) EXPECT_NEAR(std::stod(rows[i][2]), 0.0, 1e-15);
    EXPECT_NEAR(std::stod(rows[i][3]), 0.0, 1e-15);
    EXPECT_NEAR(std::stod(rows[i][4]), 0.0, 1e-15);
  }
}

TEST_F(CliTest, ResidualNeverAboveMultinomial) {
  const auto r = invoke({"variance", "--weights", "0.05,0.35,0.2,0.4", "--f-values", "1,-2,0.5,3",
                         "--n", "6", "--replicates", "100"});
  ASSERT_EQ(r.code, 0) << r.err;
  double mult = 0.0;
  double res = 0.0;
  for (const auto& row : parse_csv(r.out)) {
    if (row[0] == "multinomial") mult = std::stod(row[2]);
    if (row[0] == "residual") res = std::stod(row[2]);
  }
  EXPECT_GT(mult, 0.0);
  EXPECT_LE(res, mult);
}

TEST_F(CliTest, VarianceUsageErrors) {
  EXPECT_EQ(invoke({"variance", "--weights", "0.5,0.5"}).code, 2);
  EXPECT_EQ(invoke({"variance", "--weights", "0.5,0.5", "--f-values", "1,2,3"}).code, 2);
  EXPECT_EQ(invoke({"variance", "--counterexample", "omega=0.75,n=5"}).code, 2);
}

TEST_F(CliTest, CounterexampleCommand) {
  const auto r = invoke({"counterexample", "--omega", "0.9", "--n", "100", "--replicates", "200"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  EXPECT_EQ(rows[0][0], "scheme");
  bool saw_systematic = false;
  for (const auto& row : rows) {
    if (row[0] == "systematic") {
      saw_systematic = true;
      EXPECT_NEAR(std::stod(row[2]), 0.4 * 0.1, 1e-12);
      EXPECT_NEAR(std::stod(row[4]), 0.4 * 0.1, 1e-12);
    }
  }
  EXPECT_TRUE(saw_systematic);
  EXPECT_EQ(invoke({"counterexample", "--omega", "0.9", "--n", "4", "--ordering", "spiral"}).code, 2);
}

TEST_F(CliTest, FilterHeaderOnlyForZeroHorizon) {
  const auto r = invoke({"filter", "--model", "lingauss", "--horizon", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "k,estimate_x,ess,resampled\n");
}

TEST_F(CliTest, FilterRequiresKnownModel) {
  EXPECT_EQ(invoke({"filter", "--scheme", "systematic"}).code, 2);
  EXPECT_EQ(invoke({"filter", "--model", "lorenz"}).code, 2);
  EXPECT_EQ(invoke({"filter", "--model", "lingauss", "--config", path("absent.json")}).code, 2);
  EXPECT_EQ(invoke({"filter", "--model", "lingauss", "--horizon", "51"}).code, 2);
}

TEST_F(CliTest, FilterDeterministic) {
  for (const char* name : {"t1.csv", "t2.csv"}) {
    ASSERT_EQ(invoke({"filter", "--model", "lingauss", "--scheme", "systematic", "--seed", "7", "--m",
                      "300", "--output", path(name)})
                  .code,
              0);
  }
  const std::string trace = slurp(path("t1.csv"));
  EXPECT_EQ(trace, slurp(path("t2.csv")));
  EXPECT_EQ(parse_csv(trace).size(), 51u);
  const auto meta = nlohmann::json::parse(slurp(path("t1.csv.meta.json")));
  EXPECT_EQ(meta["seed"], 7);
  EXPECT_EQ(meta["config"]["scheme"], "systematic");
}

TEST_F(CliTest, FilterConfigFileAndObservations) {
  {
    std::ofstream f(path("cfg.json"));
    f << R"({"m": 200, "scheme": "residual", "horizon": 5})";
  }
  const auto from_config = invoke({"filter", "--model", "lingauss", "--config", path("cfg.json"),
                                   "--observations", kObservations, "--seed", "4"});
  const auto from_flags = invoke({"filter", "--model", "lingauss", "--m", "200", "--scheme", "residual",
                                  "--horizon", "5", "--seed", "4"});
  ASSERT_EQ(from_config.code, 0) << from_config.err;
  EXPECT_EQ(from_config.out, from_flags.out);
  EXPECT_EQ(parse_csv(from_config.out).size(), 6u);

  ASSERT_EQ(invoke({"filter", "--model", "lingauss", "--horizon", "0", "--emit-observations",
                    path("obs.csv")})
                .code,
            0);
  EXPECT_EQ(slurp(path("obs.csv")), slurp(kObservations));
}

TEST_F(CliTest, Lemma1TargetInMetadata) {
  const auto r = invoke({"asymptotics", "lemma1", "--pair", "reference", "--alpha", "1", "--f", "one",
                         "--m-grid", "1000,2000", "--replicates", "4", "--output", path("l.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto meta = nlohmann::json::parse(slurp(path("l.csv.meta.json")));
  EXPECT_NEAR(meta["results"]["target"].get<double>(), 0.5, 1e-9);
  EXPECT_EQ(meta["command"], "asymptotics lemma1");
  EXPECT_EQ(parse_csv(slurp(path("l.csv"))).size(), 3u);
}

TEST_F(CliTest, AsymptoticsDegeneracyExitThree) {
  EXPECT_EQ(invoke({"asymptotics", "lemma1", "--pair", "flat", "--alpha", "2", "--m-grid", "100"}).code, 3);
  EXPECT_EQ(invoke({"asymptotics", "kappa", "--pair", "flat", "--alpha", "1"}).code, 3);
  EXPECT_EQ(invoke({"asymptotics", "lemma1", "--pair", "sideways"}).code, 2);
  EXPECT_EQ(invoke({"asymptotics"}).code, 2);
}

TEST_F(CliTest, KappaAndSupport) {
  const auto k = invoke({"asymptotics", "kappa", "--pair", "reference", "--alpha", "1", "--f", "x"});
  ASSERT_EQ(k.code, 0) << k.err;
  const auto rows = parse_csv(k.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(std::stod(rows[1][3]), 11.0 / 288.0, 1e-9);
  EXPECT_NEAR(std::stod(rows[1][4]), 1.0 / 18.0, 1e-9);

  const auto s = invoke({"asymptotics", "support", "--pair", "flat", "--alpha", "3", "--samples", "1000"});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_NEAR(std::stod(parse_csv(s.out)[1][4]), 1.0, 1e-12);
}

TEST_F(CliTest, ThreadsDoNotChangeOutput) {
  const std::vector<std::string> lemma{"asymptotics", "lemma1", "--m-grid", "500,1000", "--replicates",
                                       "6", "--seed", "2"};
  auto one = lemma;
  one.insert(one.end(), {"--threads", "1", "--output", path("t1.csv")});
  auto four = lemma;
  four.insert(four.end(), {"--threads", "4", "--output", path("t4.csv")});
  ASSERT_EQ(invoke(one).code, 0);
  ASSERT_EQ(invoke(four).code, 0);
  EXPECT_EQ(slurp(path("t1.csv")), slurp(path("t4.csv")));
  EXPECT_EQ(slurp(path("t1.csv.meta.json")), slurp(path("t4.csv.meta.json")));
}

TEST_F(CliTest, HelpAndVersion) {
  EXPECT_EQ(invoke({"--help"}).code, 0);
  EXPECT_EQ(invoke({"--version"}).code, 0);
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"resample"}).code, 2);
}
