#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qte/estimators.hpp"
#include "qte/laws.hpp"

namespace qte {

struct ScenarioSpec {
  // normal, laplace, cauchy, huber or empirical
  std::string law = "normal";
  double k1 = 1.0;
  double k2 = 1.0;
  std::string empirical_file;
  std::vector<double> empirical_data;
  std::size_t n0 = 10000;
  std::size_t n1 = 10000;
  double shift = 0.0;
  std::size_t reps = 100;
  std::uint64_t seed = 0;
  std::vector<std::string> estimators{"means", "eif", "waq"};
  EstimatorSettings settings{};
};

// Throws BadConfig or BadLaw.
void validate(const ScenarioSpec& spec);

// Bound on the variance of regular shift estimators: 1 / (p (1-p) I(f) n).
double efficiency_bound(const Law& law, double p, std::size_t n);
// Plug-in bound from a density fit on the whole population.
double efficiency_bound_empirical(std::span<const double> population, double p, std::size_t n,
                                  const DensityConfig& density = {});

// One replication's arms: control from the law, treated shifted by spec.shift.
TwoSampleView draw_scenario_sample(const ScenarioSpec& spec, std::uint64_t rep_seed);

struct MonteCarloRow {
  std::string estimator;
  double bias = 0.0;
  double sd = 0.0;
  double relative_efficiency = 0.0;
  double rmse = 0.0;
  double mad = 0.0;
  double coverage = 0.0;
  double median_ci_length = 0.0;
  std::size_t completed = 0;
  std::size_t failed = 0;
};

struct MonteCarloReport {
  ScenarioSpec spec;
  double bound = 0.0;
  std::vector<MonteCarloRow> rows;
  double wall_seconds = 0.0;
  int threads = 1;
};

enum class Execution { Parallel, Serial };

// Replications are seeded by (seed, replication index), so Parallel and
// Serial give identical reports.
MonteCarloReport run_scenario(const ScenarioSpec& spec, Execution execution = Execution::Parallel);

// Summary statistics of replicated estimates against the true value.
MonteCarloRow summarize(const std::string& estimator, std::span<const double> estimates,
                        std::span<const double> ci_lo, std::span<const double> ci_hi, double truth, double bound);

// CSV omits timing so identical specs give identical bytes.
std::string report_csv(const MonteCarloReport& report);
std::string report_table(const MonteCarloReport& report);

}  // namespace qte
