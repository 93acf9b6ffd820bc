#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  using qte::cli::CliConfig;
  CliConfig config;
  CLI::App app{"Treatment-effect estimation for randomized experiments with heavy-tailed outcomes"};
  app.require_subcommand(1);
  app.add_flag("-v,--verbose", config.verbosity, "More diagnostics on stderr");

  auto* estimate = app.add_subcommand("estimate", "Estimate the effect from a CSV with y,z columns");
  estimate->add_option("-i,--input", config.input, "Input CSV")->required();
  estimate->add_option("-o,--output", config.output, "Output JSON (default stdout)");
  estimate->add_option("--estimator", config.estimator, "means|medians|hl|trim|wins|eif|waq");
  estimate->add_option("--trim-mode", config.trim_mode, "sym|asym|right");
  estimate->add_option("--trim-range", config.trim_range, "Search range a0,a1")->delimiter(',')->expected(2);
  estimate->add_flag("--split", config.split, "Cross-fit the density on sample halves");
  estimate->add_option("--eif-mode", config.eif_mode, "root|onestep");
  estimate->add_option("--seed", config.seed, "Seed for splits and resampling");
  estimate->add_option("--ci", config.ci, "analytic|bootstrap");
  estimate->add_option("--level", config.level, "Interval coverage level");
  estimate->add_option("--boot-m", config.boot_m, "Bootstrap resample size");
  estimate->add_option("--boot-B", config.boot_b, "Bootstrap replicates");
  estimate->add_option("--model", config.model, "Parametric model: additive|multiplicative");
  estimate->add_option("--information", config.information, "outer|observed");
  estimate->add_option("--report", config.report, "theta|is-ate|pop-ate|level");
  estimate->add_option("--level-means", config.level_means, "mu0,mu1 for the level report")->delimiter(',')->expected(2);
  estimate->add_option("--level-p", config.level_p, "Treated share for the level report");

  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo scenario from a JSON config");
  simulate->add_option("-c,--config", config.config, "Scenario JSON")->required();
  simulate->add_option("--seed", config.seed, "Master seed")->required();
  simulate->add_option("-o,--output", config.output, "CSV report path (default: after the table on stdout)");

  auto* weights = app.add_subcommand("weights", "Emit WAQ weights and density diagnostics as CSV");
  weights->add_option("-i,--input", config.input, "Input CSV; the control arm is used");
  weights->add_option("--law", config.law, "normal|laplace|cauchy|huber");
  weights->add_option("--k1", config.k1, "Huber left kink");
  weights->add_option("--k2", config.k2, "Huber right kink");
  weights->add_option("-o,--output", config.output, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (estimate->parsed()) return qte::cli::cmd_estimate(config, std::cout, std::cerr);
  if (simulate->parsed()) return qte::cli::cmd_simulate(config, std::cout, std::cerr);
  return qte::cli::cmd_weights(config, std::cout, std::cerr);
}
