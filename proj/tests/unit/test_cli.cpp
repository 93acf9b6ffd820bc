#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "commands.hpp"
#include "json.hpp"

using namespace qte::cli;
using nlohmann::json;

namespace {

std::string fixture(const std::string& name) { return std::string(QTE_FIXTURE_DIR) + "/" + name; }

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("qte_cli_test_" + name);
  std::ofstream(path) << content;
  return path;
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

template <class F>
Outcome run(F command, const CliConfig& c) {
  std::ostringstream out, err;
  const int code = command(c, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::vector<double> column(const std::vector<std::vector<std::string>>& rows, const std::string& name) {
  const auto& header = rows.front();
  const auto idx = static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
  std::vector<double> out;
  for (std::size_t r = 1; r < rows.size(); ++r) out.push_back(std::stod(rows[r].at(idx)));
  return out;
}

}  // namespace

TEST(CliEstimate, MeansOnFourRows) {
  CliConfig c;
  c.input = fixture("four_rows.csv");
  c.estimator = "means";
  const Outcome r = run(cmd_estimate, c);
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["tau_hat"].get<double>(), 5.0);
  EXPECT_EQ(j["estimator"], "means");
  EXPECT_EQ(j["n0"], 2);
  EXPECT_EQ(j["n1"], 2);
  EXPECT_DOUBLE_EQ(j["p"].get<double>(), 0.5);
  EXPECT_EQ(j["ci"]["source"], "analytic");
}

TEST(CliEstimate, EifOnSyntheticFixtureHasFullDocument) {
  CliConfig c;
  c.input = fixture("synthetic.csv");
  const Outcome r = run(cmd_estimate, c);
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  for (const char* key : {"estimator", "tau_hat", "var_hat", "ci", "diagnostics", "n0", "n1", "p"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_LT(j["ci"]["lo"].get<double>(), j["ci"]["hi"].get<double>());
  EXPECT_NEAR(j["tau_hat"].get<double>(), 0.5, 0.3);
}

TEST(CliEstimate, ValidationFailuresExitTwo) {
  CliConfig c;
  c.input = fixture("bad_indicator.csv");
  Outcome r = run(cmd_estimate, c);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("BadIndicator"), std::string::npos);
  c.input = fixture("four_rows.csv");
  c.estimator = "mode";
  EXPECT_EQ(run(cmd_estimate, c).code, 2);
  c.estimator = "means";
  c.level = 1.5;
  EXPECT_EQ(run(cmd_estimate, c).code, 2);
  c.level = 0.95;
  c.input = fixture("missing.csv");
  EXPECT_EQ(run(cmd_estimate, c).code, 2);
}

TEST(CliEstimate, EstimatorFailureExitsThreeWithErrorName) {
  std::string csv = "y,z\n";
  for (int i = 0; i < 200; ++i) csv += "1.0,0\n" + std::to_string(i) + ",1\n";
  CliConfig c;
  c.input = temp_file("constant_control.csv", csv).string();
  c.estimator = "eif";
  const Outcome r = run(cmd_estimate, c);
  EXPECT_EQ(r.code, 3);
  const json j = json::parse(r.out);
  EXPECT_EQ(j["error"], "DegenerateScale");
  EXPECT_EQ(j["estimator"], "eif");
}

TEST(CliEstimate, ParametricReports) {
  CliConfig c;
  c.input = fixture("positive.csv");
  c.model = "multiplicative";
  Outcome r = run(cmd_estimate, c);
  ASSERT_EQ(r.code, 0) << r.err;
  const double log_effect = json::parse(r.out)["tau_hat"].get<double>();
  EXPECT_NEAR(log_effect, std::log(1.5), 0.15);
  c.report = "level";
  r = run(cmd_estimate, c);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_GT(json::parse(r.out)["tau_hat"].get<double>(), 0.0);
  c.model = "additive";
  EXPECT_EQ(run(cmd_estimate, c).code, 2);
}

TEST(CliSimulate, DeterministicAndValidated) {
  const auto cfg = temp_file("scenario.json",
                             R"({"law": "normal", "n0": 200, "n1": 200, "reps": 10, "estimators": ["means", "medians"]})");
  CliConfig c;
  c.config = cfg.string();
  c.seed = 5;
  // The CSV report is the reproducible artifact; the table header carries wall time.
  auto csv_of_run = [&](const std::string& name) {
    c.output = (std::filesystem::temp_directory_path() / name).string();
    const Outcome r = run(cmd_simulate, c);
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("rel.eff"), std::string::npos);
    std::ifstream in(c.output);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const std::string a = csv_of_run("qte_cli_test_run_a.csv");
  const std::string b = csv_of_run("qte_cli_test_run_b.csv");
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("relative_efficiency"), std::string::npos);
  c.output.clear();

  c.seed.reset();
  EXPECT_EQ(run(cmd_simulate, c).code, 2);
  c.seed = 5;
  c.config = temp_file("bad_est.json", R"({"law": "normal", "n0": 200, "n1": 200, "reps": 10, "estimators": ["mode"]})").string();
  EXPECT_EQ(run(cmd_simulate, c).code, 2);
  c.config = temp_file("zero_reps.json", R"({"law": "normal", "n0": 200, "n1": 200, "reps": 0})").string();
  EXPECT_EQ(run(cmd_simulate, c).code, 2);
  c.config = temp_file("unknown_key.json", R"({"law": "normal", "colour": 1})").string();
  EXPECT_EQ(run(cmd_simulate, c).code, 2);
}

TEST(CliWeights, CauchyMatchesClosedForm) {
  CliConfig c;
  c.law = "cauchy";
  const Outcome r = run(cmd_weights, c);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  const auto u = column(rows, "u");
  const auto w = column(rows, "w");
  ASSERT_EQ(u.size(), 999u);
  std::vector<double> g(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double s = std::sin(M_PI * u[i]);
    g[i] = -std::cos(2.0 * M_PI * u[i]) * s * s;
  }
  const double mg = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) worst = std::max(worst, std::abs(w[i] - g[i] / mg));
  EXPECT_LT(worst, 1e-9);
  const auto w1 = column(rows, "w_sum1");
  EXPECT_NEAR(std::accumulate(w1.begin(), w1.end(), 0.0), 1.0, 1e-12);
}

TEST(CliWeights, NormalIsFlatAndSampleHasMeanOne) {
  CliConfig c;
  c.law = "normal";
  Outcome r = run(cmd_weights, c);
  ASSERT_EQ(r.code, 0) << r.err;
  for (double v : column(parse_csv(r.out), "w")) EXPECT_NEAR(v, 1.0, 1e-12);
  c.law.clear();
  c.input = fixture("synthetic.csv");
  r = run(cmd_weights, c);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto w = column(parse_csv(r.out), "w");
  EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size()), 1.0, 1e-12);
  c.law = "normal";
  EXPECT_EQ(run(cmd_weights, c).code, 2);
}
