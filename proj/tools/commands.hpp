#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qte::cli {

struct CliConfig {
  std::string input;
  std::string output;
  std::string csv_output;
  std::string config;
  std::string estimator = "eif";
  std::string trim_mode = "asym";
  std::vector<double> trim_range{0.0, 0.495};
  bool split = false;
  std::string eif_mode = "root";
  std::optional<std::uint64_t> seed;
  std::string ci = "analytic";
  double level = 0.95;
  std::size_t boot_m = 2000;
  std::size_t boot_b = 200;
  std::string model;
  std::string information = "outer";
  std::string report = "theta";
  std::vector<double> level_means;
  std::optional<double> level_p;
  std::string law;
  double k1 = 1.0;
  double k2 = 1.0;
  int verbosity = 0;
};

// Exit codes: 0 success, 2 invalid input or flags, 3 estimation failure.
int cmd_estimate(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_simulate(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_weights(const CliConfig& config, std::ostream& out, std::ostream& err);

// Reads `y` and `z` columns from a CSV file with a header row.
struct ObservationTable {
  std::vector<double> y;
  std::vector<int> z;
};
ObservationTable read_observations(const std::string& path);
// Reads the `y` column, or the first column when there is no `y` header.
std::vector<double> read_outcomes(const std::string& path);

}  // namespace qte::cli
