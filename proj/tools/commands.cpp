#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "qte/errors.hpp"
#include "qte/estimators.hpp"
#include "qte/parametric.hpp"
#include "qte/shift.hpp"
#include "qte/simulation.hpp"

namespace qte::cli {

using nlohmann::json;

namespace {

// Wraps failures found while checking inputs so they map to exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

[[noreturn]] void reject(const std::string& message) { throw InputError(message); }

void write_output(const std::string& path, std::ostream& fallback, const std::string& text) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::BadConfig, "cannot write '" + path + "'");
  f << text;
}

TrimMode parse_trim_mode(const std::string& s) {
  if (s == "sym") return TrimMode::Symmetric;
  if (s == "asym") return TrimMode::Asymmetric;
  if (s == "right") return TrimMode::RightOnly;
  reject("BadConfig: --trim-mode must be sym, asym or right");
}

EstimatorSettings settings_from(const CliConfig& c) {
  EstimatorSettings s;
  if (c.ci == "analytic") {
    s.ci = CiSource::Analytic;
  } else if (c.ci == "bootstrap") {
    s.ci = CiSource::Bootstrap;
  } else {
    reject("BadConfig: --ci must be analytic or bootstrap");
  }
  if (!(c.level > 0.0 && c.level < 1.0)) reject("BadConfig: --level must lie in (0,1)");
  s.level = c.level;
  if (c.boot_b < 50) reject("BadConfig: --boot-B must be at least 50");
  if (c.boot_m < 2) reject("BadConfig: --boot-m must be at least 2");
  s.bootstrap = BootstrapConfig{c.boot_m, c.boot_b, c.seed.value_or(0)};
  if (c.trim_range.size() != 2 || !(c.trim_range[0] >= 0.0 && c.trim_range[0] <= c.trim_range[1] &&
                                    c.trim_range[1] < 1.0)) {
    reject("BadTrim: --trim-range needs a0,a1 with 0 <= a0 <= a1 < 1");
  }
  s.trim_alpha0 = c.trim_range[0];
  s.trim_alpha1 = c.trim_range[1];
  s.trim_mode = parse_trim_mode(c.trim_mode);
  if (c.eif_mode == "root") {
    s.eif_mode = EifMode::Root;
  } else if (c.eif_mode == "onestep") {
    s.eif_mode = EifMode::OneStep;
  } else {
    reject("BadConfig: --eif-mode must be root or onestep");
  }
  s.split = c.split;
  s.seed = c.seed.value_or(0);
  return s;
}

json estimate_json(const std::string& name, const Estimate& est, const ConfidenceInterval& ci,
                   const TwoSampleView& view) {
  json j;
  j["estimator"] = name;
  j["tau_hat"] = est.tau_hat;
  j["var_hat"] = est.var_hat ? json(*est.var_hat) : json(nullptr);
  j["ci"] = {{"lo", ci.lo}, {"hi", ci.hi}, {"level", ci.level}, {"source", std::string(ci_source_name(ci.source))}};
  j["diagnostics"] = json::object();
  for (const auto& [k, v] : est.diagnostics) j["diagnostics"][k] = v;
  j["n0"] = view.n0();
  j["n1"] = view.n1();
  j["p"] = view.p();
  return j;
}

// ---------------------------------------------------------------- parametric

struct ParametricRequest {
  bool multiplicative = false;
  std::string report;
  InformationKind information = InformationKind::OuterProduct;
  std::vector<double> level_means;
  std::optional<double> level_p;
  bool split = false;
};

TwoSampleView log_view(const TwoSampleView& raw) {
  std::vector<double> c, t;
  for (double y : raw.control()) c.push_back(std::log(y));
  for (double y : raw.treated()) t.push_back(std::log(y));
  return TwoSampleView(std::move(c), std::move(t));
}

struct ParametricResult {
  double value = 0.0;
  std::optional<double> var;
  std::map<std::string, double> diagnostics;
};

ParametricResult run_parametric(const TwoSampleView& raw, const ParametricRequest& req, std::uint64_t seed) {
  const AdditiveModel additive;
  const TwoSampleView work = req.multiplicative ? log_view(raw) : raw;
  const double half[] = {0.5};
  const Theta init = quantile_match_init(work, additive, half);
  OneStepOptions opts;
  opts.split = req.split;
  opts.seed = seed;
  opts.information = req.information;
  const ParametricEstimate fit = one_step_theta(work, init, additive, opts);
  const double theta = fit.theta[0];
  const double v = fit.covariance(0, 0);

  ParametricResult r;
  r.diagnostics = fit.estimate.diagnostics;
  r.diagnostics["theta"] = theta;
  r.diagnostics["theta_var"] = v;
  if (req.report == "theta") {
    r.value = theta;
    r.var = v;
  } else if (req.report == "level") {
    const double mu0 = req.level_means.empty() ? mean(raw.control()) : req.level_means[0];
    const double mu1 = req.level_means.empty() ? mean(raw.treated()) : req.level_means[1];
    const LevelEffect level = level_from_log(theta, mu0, mu1, req.level_p.value_or(raw.p()), v);
    r.value = level.tau;
    r.var = level.var;
    r.diagnostics["mu0"] = mu0;
    r.diagnostics["mu1"] = mu1;
    r.diagnostics["level_p"] = level.p;
  } else {
    const MultiplicativeModel mult;
    const Theta ratio = Theta::Constant(1, std::exp(theta));
    const Theta shift = Theta::Constant(1, theta);
    if (req.report == "is-ate") {
      r.value = req.multiplicative ? in_sample_ate(raw, mult, ratio) : in_sample_ate(raw, additive, shift);
    } else {
      r.value = req.multiplicative ? population_ate(raw.control(), mult, ratio)
                                   : population_ate(raw.control(), additive, shift);
    }
    // Under the additive model both targets equal theta.
    if (!req.multiplicative) r.var = v;
  }
  return r;
}

int estimate_parametric(const CliConfig& c, const TwoSampleView& view, const EstimatorSettings& settings,
                        std::ostream& out) {
  ParametricRequest req;
  req.multiplicative = c.model == "multiplicative";
  req.report = c.report;
  req.information = c.information == "observed" ? InformationKind::Observed : InformationKind::OuterProduct;
  req.level_means = c.level_means;
  req.level_p = c.level_p;
  req.split = c.split;
  const std::uint64_t seed = settings.seed;

  ParametricResult r = run_parametric(view, req, seed);
  Estimate est;
  est.method = Method::Parametric;
  est.tau_hat = r.value;
  est.diagnostics = r.diagnostics;
  CiSource source = CiSource::Analytic;
  if (settings.ci == CiSource::Bootstrap || !r.var) {
    BootstrapConfig boot = settings.bootstrap;
    boot.m = std::min(boot.m, view.n());
    est.var_hat = m_of_n_bootstrap_var(
        view, [&req](const TwoSampleView& v, std::uint64_t s) { return run_parametric(v, req, s).value; }, boot);
    source = CiSource::Bootstrap;
    est.diagnostics["variance_bootstrap"] = 1.0;
  } else {
    est.var_hat = r.var;
  }
  const ConfidenceInterval ci = normal_ci(est, settings.level, source);
  json j = estimate_json("parametric", est, ci, view);
  j["model"] = c.model;
  j["report"] = c.report;
  write_output(c.output, out, j.dump(2) + "\n");
  return 0;
}

void check_parametric_flags(const CliConfig& c, const TwoSampleView& view) {
  if (c.model != "additive" && c.model != "multiplicative") reject("BadConfig: --model must be additive or multiplicative");
  static const std::set<std::string> reports{"theta", "is-ate", "pop-ate", "level"};
  if (!reports.count(c.report)) reject("BadConfig: --report must be theta, is-ate, pop-ate or level");
  if (c.information != "outer" && c.information != "observed") {
    reject("BadConfig: --information must be outer or observed");
  }
  if (c.report == "level" && c.model != "multiplicative") reject("BadConfig: --report level needs --model multiplicative");
  if (!c.level_means.empty() && c.level_means.size() != 2) reject("BadConfig: --level-means takes mu0,mu1");
  if (c.level_p && !(*c.level_p > 0.0 && *c.level_p < 1.0)) reject("BadConfig: --level-p must lie in (0,1)");
  if (c.model == "multiplicative") {
    for (auto arm : {view.control(), view.treated()}) {
      for (double y : arm) {
        if (!(y > 0.0)) reject("BadParams: the multiplicative model needs positive outcomes");
      }
    }
  }
}

// ---------------------------------------------------------------- simulate

ScenarioSpec scenario_from_json(const json& j) {
  static const std::set<std::string> keys{"law",       "k1",     "k2",        "n0",         "n1",
                                          "shift",     "reps",   "seed",      "estimators", "ci",
                                          "boot_m",    "boot_B", "empirical_file", "level", "trim_mode",
                                          "trim_range", "eif_mode", "split"};
  if (!j.is_object()) reject("BadConfig: scenario must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) reject("BadConfig: unknown scenario key '" + k + "'");
  }
  ScenarioSpec s;
  try {
    s.law = j.value("law", s.law);
    s.k1 = j.value("k1", s.k1);
    s.k2 = j.value("k2", s.k2);
    const auto n0 = j.value("n0", static_cast<long long>(s.n0));
    const auto n1 = j.value("n1", static_cast<long long>(s.n1));
    const auto reps = j.value("reps", static_cast<long long>(s.reps));
    if (n0 < 0 || n1 < 0 || reps < 0) reject("BadConfig: n0, n1 and reps must be nonnegative");
    s.n0 = static_cast<std::size_t>(n0);
    s.n1 = static_cast<std::size_t>(n1);
    s.reps = static_cast<std::size_t>(reps);
    s.shift = j.value("shift", s.shift);
    s.seed = j.value("seed", s.seed);
    if (j.contains("estimators")) s.estimators = j.at("estimators").get<std::vector<std::string>>();
    s.empirical_file = j.value("empirical_file", std::string());
    CliConfig c;
    c.ci = j.value("ci", c.ci);
    c.level = j.value("level", c.level);
    c.boot_m = j.value("boot_m", c.boot_m);
    c.boot_b = j.value("boot_B", c.boot_b);
    c.trim_mode = j.value("trim_mode", c.trim_mode);
    if (j.contains("trim_range")) c.trim_range = j.at("trim_range").get<std::vector<double>>();
    c.eif_mode = j.value("eif_mode", c.eif_mode);
    c.split = j.value("split", c.split);
    s.settings = settings_from(c);
  } catch (const json::exception& e) {
    reject(std::string("BadConfig: ") + e.what());
  }
  return s;
}

// ---------------------------------------------------------------- weights

std::string law_weight_csv(const Law& law) {
  constexpr std::size_t kGrid = 999;
  std::vector<double> u(kGrid), w(kGrid);
  double total = 0.0;
  for (std::size_t k = 0; k < kGrid; ++k) {
    u[k] = static_cast<double>(k + 1) / static_cast<double>(kGrid + 1);
    const OracleWeight ow = optimal_weight_oracle(law, u[k]);
    // A point mass at one half is carried by that grid point.
    w[k] = ow.point_mass_at_half ? (std::abs(u[k] - 0.5) < 1e-12 ? 1.0 : 0.0) : ow.weight;
    total += w[k];
  }
  std::string csv = "u,w,w_sum1,truncated,f_hat,lpsi2\n";
  for (std::size_t k = 0; k < kGrid; ++k) {
    const double x = law.quantile(u[k]);
    csv += fmt::format("{:.17g},{:.17g},{:.17g},0,{:.17g},{:.17g}\n", u[k], w[k] * kGrid / total, w[k] / total,
                       law.pdf(x), law.score_derivative(x));
  }
  return csv;
}

std::string sample_weight_csv(const TwoSampleView& view) {
  const DensityFit fit0 = fit_adaptive_density(view.control());
  const WaqWeights ww = waq_weights(fit0, view);
  const double n0 = static_cast<double>(view.n0());
  std::string csv = "u,w,w_sum1,truncated,f_hat,lpsi2\n";
  for (std::size_t i = 0; i < ww.w.size(); ++i) {
    const double q = view.control()[i];
    csv += fmt::format("{:.17g},{:.17g},{:.17g},{},{:.17g},{:.17g}\n", ww.u_grid[i], ww.w[i] * n0, ww.w[i],
                       ww.truncated[i] ? 1 : 0, fit0.density(q), fit0.lpsi(q, 2));
  }
  return csv;
}

TwoSampleView load_view(const std::string& path) {
  const ObservationTable table = read_observations(path);
  std::vector<Observation> obs(table.y.size());
  for (std::size_t i = 0; i < obs.size(); ++i) obs[i] = Observation{table.y[i], table.z[i]};
  return split_sample(obs);
}

template <class Validate, class Run>
int guarded(std::ostream& out, std::ostream& err, const std::string& output, const std::string& estimator,
            Validate&& validate, Run&& run) {
  try {
    validate();
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  try {
    return run();
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    json j{{"error", e.name()}, {"message", e.what()}};
    if (!estimator.empty()) j["estimator"] = estimator;
    try {
      write_output(output, out, j.dump(2) + "\n");
    } catch (const Error&) {
      out << j.dump(2) << "\n";
    }
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int cmd_estimate(const CliConfig& c, std::ostream& out, std::ostream& err) {
  std::optional<TwoSampleView> view;
  EstimatorSettings settings;
  const bool parametric = !c.model.empty();
  const std::string label = parametric ? "parametric" : c.estimator;
  return guarded(
      out, err, c.output, label,
      [&] {
        if (c.input.empty()) reject("BadConfig: --input is required");
        settings = settings_from(c);
        if (!parametric && !is_known_estimator(c.estimator)) reject("BadConfig: unknown estimator '" + c.estimator + "'");
        view.emplace(load_view(c.input));
        if (parametric) check_parametric_flags(c, *view);
      },
      [&] {
        if (parametric) return estimate_parametric(c, *view, settings, out);
        const EstimateWithCi r = run_estimator(c.estimator, *view, settings);
        write_output(c.output, out, estimate_json(c.estimator, r.estimate, r.ci, *view).dump(2) + "\n");
        return 0;
      });
}

int cmd_simulate(const CliConfig& c, std::ostream& out, std::ostream& err) {
  ScenarioSpec spec;
  return guarded(
      out, err, c.output, "",
      [&] {
        if (!c.seed) reject("BadConfig: --seed is required for simulate");
        if (c.config.empty()) reject("BadConfig: --config is required");
        std::ifstream f(c.config);
        if (!f) reject("BadConfig: cannot open '" + c.config + "'");
        json j;
        try {
          j = json::parse(f);
        } catch (const json::exception& e) {
          reject(std::string("BadConfig: ") + e.what());
        }
        spec = scenario_from_json(j);
        spec.seed = *c.seed;
        if (spec.law == "empirical") {
          if (spec.empirical_file.empty()) reject("BadConfig: law empirical needs empirical_file");
          spec.empirical_data = read_outcomes(spec.empirical_file);
        }
        validate(spec);
      },
      [&] {
        const MonteCarloReport report = run_scenario(spec);
        const std::string table = report_table(report);
        const std::string csv = report_csv(report);
        if (c.output.empty()) {
          out << table << "\n" << csv;
        } else {
          write_output(c.output, out, csv);
          out << table;
        }
        return 0;
      });
}

int cmd_weights(const CliConfig& c, std::ostream& out, std::ostream& err) {
  std::optional<Law> law;
  std::optional<TwoSampleView> view;
  return guarded(
      out, err, c.output, "waq",
      [&] {
        if (c.law.empty() == c.input.empty()) reject("BadConfig: give exactly one of --law and --input");
        if (!c.law.empty()) {
          law.emplace(Law::from_name(c.law, c.k1, c.k2));
        } else {
          view.emplace(load_view(c.input));
        }
      },
      [&] {
        write_output(c.output, out, law ? law_weight_csv(*law) : sample_weight_csv(*view));
        return 0;
      });
}

}  // namespace qte::cli
