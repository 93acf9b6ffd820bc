#include "qte/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <omp.h>

#include "qte/errors.hpp"
#include "qte/rng.hpp"

namespace qte {

namespace {

constexpr double kMaxFailureShare = 0.05;

bool is_empirical(const ScenarioSpec& spec) { return spec.law == "empirical"; }

}  // namespace

void validate(const ScenarioSpec& spec) {
  if (spec.reps < 1) fail(ErrorKind::BadConfig, "reps must be at least 1");
  if (spec.n0 < 100 || spec.n1 < 100) fail(ErrorKind::BadConfig, "each arm needs at least 100 units");
  if (spec.estimators.empty()) fail(ErrorKind::BadConfig, "no estimators requested");
  for (const auto& name : spec.estimators) {
    if (!is_known_estimator(name)) fail(ErrorKind::BadConfig, "unknown estimator '" + name + "'");
  }
  if (!std::isfinite(spec.shift)) fail(ErrorKind::BadConfig, "shift must be finite");
  if (is_empirical(spec)) {
    if (spec.empirical_data.size() < spec.n0 + spec.n1) {
      fail(ErrorKind::BadConfig, "empirical population is smaller than n0 + n1");
    }
  } else {
    (void)Law::from_name(spec.law, spec.k1, spec.k2);
  }
}

double efficiency_bound(const Law& law, double p, std::size_t n) {
  if (!(p > 0.0 && p < 1.0) || n == 0) fail(ErrorKind::BadParams, "bound needs p in (0,1) and n > 0");
  return 1.0 / (p * (1.0 - p) * law.fisher_information() * static_cast<double>(n));
}

double efficiency_bound_empirical(std::span<const double> population, double p, std::size_t n,
                                  const DensityConfig& density) {
  std::vector<double> sorted(population.begin(), population.end());
  std::sort(sorted.begin(), sorted.end());
  const DensityFit fit = fit_adaptive_density(sorted, density);
  return shift_variance(fit, sorted, p, n);
}

TwoSampleView draw_scenario_sample(const ScenarioSpec& spec, std::uint64_t rep_seed) {
  std::vector<double> control;
  std::vector<double> treated;
  if (is_empirical(spec)) {
    // Partial Fisher-Yates: the first n0 + n1 positions are a draw without
    // replacement.
    std::vector<std::size_t> idx(spec.empirical_data.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(rep_seed);
    const std::size_t take = spec.n0 + spec.n1;
    for (std::size_t i = 0; i < take; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    control.reserve(spec.n0);
    treated.reserve(spec.n1);
    for (std::size_t i = 0; i < spec.n0; ++i) control.push_back(spec.empirical_data[idx[i]]);
    for (std::size_t i = spec.n0; i < take; ++i) treated.push_back(spec.empirical_data[idx[i]]);
  } else {
    const Law law = Law::from_name(spec.law, spec.k1, spec.k2);
    control = law.sample(spec.n0, substream_seed(rep_seed, 0));
    treated = law.sample(spec.n1, substream_seed(rep_seed, 1));
  }
  for (double& y : treated) y += spec.shift;
  return TwoSampleView(std::move(control), std::move(treated));
}

MonteCarloRow summarize(const std::string& estimator, std::span<const double> estimates,
                        std::span<const double> ci_lo, std::span<const double> ci_hi, double truth, double bound) {
  MonteCarloRow row;
  row.estimator = estimator;
  const std::size_t r = estimates.size();
  row.completed = r;
  if (r == 0) return row;
  const double rd = static_cast<double>(r);
  double sum = 0.0;
  for (double v : estimates) sum += v;
  const double avg = sum / rd;
  double ss = 0.0;
  double sq_err = 0.0;
  std::vector<double> abs_err(r);
  std::vector<double> lengths(r);
  std::size_t covered = 0;
  for (std::size_t i = 0; i < r; ++i) {
    ss += (estimates[i] - avg) * (estimates[i] - avg);
    sq_err += (estimates[i] - truth) * (estimates[i] - truth);
    abs_err[i] = std::abs(estimates[i] - truth);
    lengths[i] = ci_hi[i] - ci_lo[i];
    if (ci_lo[i] <= truth && truth <= ci_hi[i]) ++covered;
  }
  row.bias = avg - truth;
  row.sd = r > 1 ? std::sqrt(ss / (rd - 1.0)) : 0.0;
  row.rmse = std::sqrt(sq_err / rd);
  row.mad = median(std::move(abs_err));
  row.coverage = static_cast<double>(covered) / rd;
  row.median_ci_length = median(std::move(lengths));
  row.relative_efficiency = row.sd / std::sqrt(bound);
  return row;
}

MonteCarloReport run_scenario(const ScenarioSpec& spec, Execution execution) {
  validate(spec);
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = spec.n0 + spec.n1;
  const double p = static_cast<double>(spec.n1) / static_cast<double>(n);

  MonteCarloReport report;
  report.spec = spec;
  report.bound = is_empirical(spec) ? efficiency_bound_empirical(spec.empirical_data, p, n, spec.settings.density)
                                    : efficiency_bound(Law::from_name(spec.law, spec.k1, spec.k2), p, n);

  const std::size_t reps = spec.reps;
  const std::size_t k = spec.estimators.size();
  // Slot (rep, estimator) is written by exactly one replication.
  std::vector<double> tau(reps * k, 0.0), lo(reps * k, 0.0), hi(reps * k, 0.0);
  std::vector<char> ok(reps * k, 0);
  std::vector<int> err_kind(reps * k, -1);

  auto one_rep = [&](std::size_t rep) {
    const std::uint64_t rep_seed = substream_seed(spec.seed, rep);
    const TwoSampleView view = draw_scenario_sample(spec, rep_seed);
    EstimatorSettings settings = spec.settings;
    settings.seed = substream_seed(rep_seed, 2);
    settings.bootstrap.seed = substream_seed(rep_seed, 3);
    EstimationContext ctx(view, settings.density);
    for (std::size_t e = 0; e < k; ++e) {
      const std::size_t slot = rep * k + e;
      try {
        const EstimateWithCi r = run_estimator(spec.estimators[e], ctx, settings);
        tau[slot] = r.estimate.tau_hat;
        lo[slot] = r.ci.lo;
        hi[slot] = r.ci.hi;
        ok[slot] = 1;
      } catch (const Error& ex) {
        err_kind[slot] = static_cast<int>(ex.kind());
      }
    }
  };

  if (execution == Execution::Parallel) {
    report.threads = omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t rep = 0; rep < reps; ++rep) one_rep(rep);
  } else {
    report.threads = 1;
    for (std::size_t rep = 0; rep < reps; ++rep) one_rep(rep);
  }

  for (std::size_t e = 0; e < k; ++e) {
    std::vector<double> t, l, h;
    std::size_t failed = 0;
    int first_error = -1;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const std::size_t slot = rep * k + e;
      if (ok[slot]) {
        t.push_back(tau[slot]);
        l.push_back(lo[slot]);
        h.push_back(hi[slot]);
      } else {
        ++failed;
        if (first_error < 0) first_error = err_kind[slot];
      }
    }
    if (static_cast<double>(failed) > kMaxFailureShare * static_cast<double>(reps)) {
      fail(static_cast<ErrorKind>(first_error),
           fmt::format("estimator {} failed in {} of {} replications", spec.estimators[e], failed, reps));
    }
    MonteCarloRow row = summarize(spec.estimators[e], t, l, h, spec.shift, report.bound);
    row.failed = failed;
    report.rows.push_back(std::move(row));
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::string report_csv(const MonteCarloReport& report) {
  std::ostringstream out;
  out << "law,n0,n1,shift,reps,seed,sqrt_bound,estimator,bias,sd,relative_efficiency,rmse,mad,coverage,"
         "median_ci_length,completed,failed\n";
  const auto& s = report.spec;
  for (const auto& r : report.rows) {
    out << fmt::format("{},{},{},{:.17g},{},{},{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{}\n",
                       s.law, s.n0, s.n1, s.shift, s.reps, s.seed, std::sqrt(report.bound), r.estimator, r.bias, r.sd,
                       r.relative_efficiency, r.rmse, r.mad, r.coverage, r.median_ci_length, r.completed, r.failed);
  }
  return out.str();
}

std::string report_table(const MonteCarloReport& report) {
  const auto& s = report.spec;
  std::ostringstream out;
  out << fmt::format("law={} n0={} n1={} shift={} reps={} seed={} sqrt(bound)={:.6f} threads={} wall={:.2f}s\n",
                     s.law, s.n0, s.n1, s.shift, s.reps, s.seed, std::sqrt(report.bound), report.threads,
                     report.wall_seconds);
  out << fmt::format("{:<10}{:>12}{:>12}{:>10}{:>12}{:>12}{:>10}{:>12}{:>8}\n", "estimator", "bias", "sd", "rel.eff",
                     "rmse", "mad", "coverage", "med.len", "failed");
  for (const auto& r : report.rows) {
    out << fmt::format("{:<10}{:>12.5f}{:>12.5f}{:>10.3f}{:>12.5f}{:>12.5f}{:>10.3f}{:>12.5f}{:>8}\n", r.estimator,
                       r.bias, r.sd, r.relative_efficiency, r.rmse, r.mad, r.coverage, r.median_ci_length, r.failed);
  }
  return out.str();
}

}  // namespace qte
