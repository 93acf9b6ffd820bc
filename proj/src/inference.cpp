#include "qte/inference.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "qte/errors.hpp"
#include "qte/extended_huber.hpp"
#include "qte/rng.hpp"

namespace qte {

std::string_view ci_source_name(CiSource s) noexcept {
  return s == CiSource::Analytic ? "analytic" : "bootstrap";
}

ConfidenceInterval normal_ci(const Estimate& est, double level, CiSource source) {
  if (!est.var_hat) fail(ErrorKind::MissingVariance, "estimate carries no variance");
  if (!(level > 0.0 && level < 1.0)) fail(ErrorKind::BadConfig, "confidence level must lie in (0,1)");
  const double z = normal_quantile(0.5 * (1.0 + level));
  const double half = z * std::sqrt(*est.var_hat);
  return {est.tau_hat - half, est.tau_hat + half, level, source};
}

double m_of_n_bootstrap_var(const TwoSampleView& view, const ResampleEstimator& estimator,
                            const BootstrapConfig& config) {
  if (config.replicates < 50) fail(ErrorKind::BadConfig, "bootstrap needs at least 50 replicates");
  if (config.m > view.n() || config.m < 2) fail(ErrorKind::BadConfig, "bootstrap size m must lie in [2, n]");
  const auto m1 = static_cast<std::size_t>(
      std::clamp(std::llround(static_cast<double>(config.m) * view.p()), 1LL,
                 static_cast<long long>(config.m) - 1));
  const std::size_t m0 = config.m - m1;
  const auto control = view.control();
  const auto treated = view.treated();

  std::vector<std::optional<double>> draws(config.replicates);
  const auto reps = static_cast<std::ptrdiff_t>(config.replicates);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t r = 0; r < reps; ++r) {
    Rng rng(substream_seed(config.seed, static_cast<std::uint64_t>(r)));
    std::uniform_int_distribution<std::size_t> pick0(0, control.size() - 1);
    std::uniform_int_distribution<std::size_t> pick1(0, treated.size() - 1);
    std::vector<double> c(m0);
    std::vector<double> t(m1);
    for (auto& v : c) v = control[pick0(rng)];
    for (auto& v : t) v = treated[pick1(rng)];
    try {
      const double est = estimator(TwoSampleView(std::move(c), std::move(t)), rng());
      if (std::isfinite(est)) draws[r] = est;
    } catch (const Error&) {
    }
  }

  std::vector<double> ok;
  ok.reserve(draws.size());
  for (const auto& d : draws) {
    if (d) ok.push_back(*d);
  }
  const std::size_t failed = draws.size() - ok.size();
  if (10 * failed > draws.size()) {
    fail(ErrorKind::ResampleFailure,
         std::to_string(failed) + " of " + std::to_string(draws.size()) + " bootstrap replicates failed");
  }
  return sample_variance(ok) * static_cast<double>(config.m) / static_cast<double>(view.n());
}

}  // namespace qte
