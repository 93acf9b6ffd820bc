#include "qte/estimators.hpp"

#include <algorithm>

#include "qte/classic.hpp"
#include "qte/errors.hpp"

namespace qte {

const std::vector<std::string>& estimator_names() {
  static const std::vector<std::string> names{"means", "medians", "hl", "trim", "wins", "eif", "waq"};
  return names;
}

bool is_known_estimator(std::string_view name) {
  const auto& names = estimator_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

const DensityFit& EstimationContext::control_fit() {
  if (!fit0_) fit0_.emplace(fit_adaptive_density(view_.control(), density_));
  return *fit0_;
}

const DensityFit& EstimationContext::treated_fit() {
  if (!fit1_) fit1_.emplace(fit_adaptive_density(view_.treated(), density_));
  return *fit1_;
}

namespace {

AdaptTrimOptions trim_options(const EstimatorSettings& s, TrimEstimator which) {
  return AdaptTrimOptions{s.trim_alpha0, s.trim_alpha1, s.trim_mode, which};
}

double median_difference(const TwoSampleView& view) {
  return empirical_quantile(view.treated(), 0.5) - empirical_quantile(view.control(), 0.5);
}

Estimate analytic_estimate(std::string_view name, EstimationContext& ctx, const EstimatorSettings& s) {
  const TwoSampleView& view = ctx.view();
  if (name == "means") return diff_means(view);
  if (name == "medians") return diff_medians(view, ctx.control_fit(), ctx.treated_fit());
  if (name == "hl") {
    Estimate est = hodges_lehmann(view, HlOptions{HlVariance::None, s.bootstrap, s.density});
    est.var_hat = hodges_lehmann_rank_variance(view, ctx.control_fit());
    return est;
  }
  if (name == "trim") return adapt_trim(view, trim_options(s, TrimEstimator::Trim));
  if (name == "wins") return adapt_trim(view, trim_options(s, TrimEstimator::Wins));
  if (name == "eif") {
    if (s.split) return eif_estimate(view, EifOptions{true, s.eif_mode, s.seed, std::nullopt, s.density});
    return eif_estimate_with_fit(view, ctx.control_fit(), s.eif_mode, median_difference(view));
  }
  if (name == "waq") {
    if (s.split || view.n1() > view.n0()) return waq_estimate(view, ShiftOptions{s.split, s.seed, s.density});
    return waq_estimate_with_fit(view, ctx.control_fit());
  }
  fail(ErrorKind::BadConfig, "unknown estimator '" + std::string(name) + "'");
}

}  // namespace

double point_estimate(std::string_view name, const TwoSampleView& view, const EstimatorSettings& settings) {
  if (name == "hl") return hodges_lehmann_point(view);
  if (name == "means") return mean(view.treated()) - mean(view.control());
  if (name == "medians") return median_difference(view);
  EstimationContext ctx(view, settings.density);
  return analytic_estimate(name, ctx, settings).tau_hat;
}

EstimateWithCi run_estimator(std::string_view name, EstimationContext& context, const EstimatorSettings& settings) {
  if (!is_known_estimator(name)) fail(ErrorKind::BadConfig, "unknown estimator '" + std::string(name) + "'");
  EstimateWithCi out;
  if (settings.ci == CiSource::Analytic) {
    out.estimate = analytic_estimate(name, context, settings);
  } else {
    const TwoSampleView& view = context.view();
    if (name == "hl") {
      out.estimate = hodges_lehmann(view, HlOptions{HlVariance::None, settings.bootstrap, settings.density});
    } else {
      out.estimate = analytic_estimate(name, context, settings);
    }
    const std::string key(name);
    EstimatorSettings inner = settings;
    inner.ci = CiSource::Analytic;
    BootstrapConfig boot = settings.bootstrap;
    boot.m = std::min(boot.m, view.n());
    out.estimate.var_hat = m_of_n_bootstrap_var(
        view,
        [&key, inner](const TwoSampleView& v, std::uint64_t seed) {
          EstimatorSettings local = inner;
          local.seed = seed;
          return point_estimate(key, v, local);
        },
        boot);
  }
  out.ci = normal_ci(out.estimate, settings.level, settings.ci);
  return out;
}

EstimateWithCi run_estimator(std::string_view name, const TwoSampleView& view, const EstimatorSettings& settings) {
  EstimationContext ctx(view, settings.density);
  return run_estimator(name, ctx, settings);
}

}  // namespace qte
