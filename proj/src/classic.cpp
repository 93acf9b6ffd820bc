#include "qte/classic.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "qte/errors.hpp"

namespace qte {

Estimate diff_means(const TwoSampleView& view) {
  Estimate est;
  est.method = Method::DiffMeans;
  est.tau_hat = mean(view.treated()) - mean(view.control());
  est.var_hat = sample_variance(view.treated()) / static_cast<double>(view.n1()) +
                sample_variance(view.control()) / static_cast<double>(view.n0());
  return est;
}

Estimate diff_medians(const TwoSampleView& view, const DensityFit& fit0, const DensityFit& fit1) {
  const double m1 = empirical_quantile(view.treated(), 0.5);
  const double m0 = empirical_quantile(view.control(), 0.5);
  const double f1 = fit1.density(m1);
  const double f0 = fit0.density(m0);
  if (!(f1 > fit1.floor()) || !(f0 > fit0.floor())) {
    fail(ErrorKind::DegenerateDensity, "density at a median is below the floor");
  }
  Estimate est;
  est.method = Method::DiffMedians;
  est.tau_hat = m1 - m0;
  est.var_hat = 1.0 / (4.0 * f1 * f1 * static_cast<double>(view.n1())) +
                1.0 / (4.0 * f0 * f0 * static_cast<double>(view.n0()));
  est.diagnostics["f_median_treated"] = f1;
  est.diagnostics["f_median_control"] = f0;
  return est;
}

namespace {

// Number of pairs with t[i] - c[j] <= v. For fixed i the differences fall as
// j rises, and the first qualifying j never decreases as i rises.
std::uint64_t count_at_most(std::span<const double> t, std::span<const double> c, double v) {
  std::uint64_t count = 0;
  std::size_t j = 0;
  for (double ti : t) {
    while (j < c.size() && ti - c[j] > v) ++j;
    count += c.size() - j;
  }
  return count;
}

std::vector<double> collect_between(std::span<const double> t, std::span<const double> c, double lo,
                                    double hi) {
  std::vector<double> out;
  std::size_t j_hi = 0;  // first j with t - c[j] <= hi
  std::size_t j_lo = 0;  // first j with t - c[j] <= lo
  for (double ti : t) {
    while (j_hi < c.size() && ti - c[j_hi] > hi) ++j_hi;
    while (j_lo < c.size() && ti - c[j_lo] > lo) ++j_lo;
    for (std::size_t j = j_hi; j < j_lo; ++j) out.push_back(ti - c[j]);
  }
  return out;
}

}  // namespace

double kth_pairwise_difference(std::span<const double> treated, std::span<const double> control,
                               std::uint64_t k) {
  const std::uint64_t total = static_cast<std::uint64_t>(treated.size()) * control.size();
  if (k < 1 || k > total) fail(ErrorKind::BadQuantile, "pairwise rank out of range");
  double lo = treated.front() - control.back();
  double hi = treated.back() - control.front();
  std::uint64_t count_lo = count_at_most(treated, control, lo);
  if (count_lo >= k) return lo;
  std::uint64_t count_hi = total;
  // Invariant: count(lo) < k <= count(hi).
  const std::uint64_t small = treated.size() + control.size();
  while (count_hi - count_lo > small) {
    const double mid = lo / 2.0 + hi / 2.0;
    if (!(mid > lo && mid < hi)) return hi;  // no double strictly between
    const std::uint64_t c = count_at_most(treated, control, mid);
    if (c >= k) {
      hi = mid;
      count_hi = c;
    } else {
      lo = mid;
      count_lo = c;
    }
  }
  std::vector<double> between = collect_between(treated, control, lo, hi);
  const auto pos = static_cast<std::ptrdiff_t>(k - count_lo - 1);
  std::nth_element(between.begin(), between.begin() + pos, between.end());
  return between[static_cast<std::size_t>(pos)];
}

double hodges_lehmann_point(const TwoSampleView& view) {
  const std::uint64_t total = static_cast<std::uint64_t>(view.n1()) * view.n0();
  if (total % 2 == 1) return kth_pairwise_difference(view.treated(), view.control(), (total + 1) / 2);
  const double a = kth_pairwise_difference(view.treated(), view.control(), total / 2);
  const double b = kth_pairwise_difference(view.treated(), view.control(), total / 2 + 1);
  return (a + b) / 2.0;
}

double hodges_lehmann_rank_variance(const TwoSampleView& view, const DensityFit& fit0) {
  const double int_f2 = fit0.integral_f_squared();
  if (!(int_f2 > 0.0)) fail(ErrorKind::DegenerateDensity, "integral of squared density is zero");
  const double p = view.p();
  return 1.0 / (12.0 * p * (1.0 - p) * static_cast<double>(view.n()) * int_f2 * int_f2);
}

Estimate hodges_lehmann(const TwoSampleView& view, const HlOptions& options) {
  Estimate est;
  est.method = Method::HodgesLehmann;
  est.tau_hat = hodges_lehmann_point(view);
  switch (options.variance) {
    case HlVariance::Bootstrap: {
      BootstrapConfig boot = options.bootstrap;
      boot.m = std::min(boot.m, view.n());
      est.var_hat = m_of_n_bootstrap_var(
          view, [](const TwoSampleView& v, std::uint64_t) { return hodges_lehmann_point(v); }, boot);
      est.diagnostics["variance_bootstrap"] = 1.0;
      break;
    }
    case HlVariance::RankPlugin: {
      const DensityFit fit0 = fit_adaptive_density(view.control(), options.density);
      est.var_hat = hodges_lehmann_rank_variance(view, fit0);
      est.diagnostics["variance_bootstrap"] = 0.0;
      break;
    }
    case HlVariance::None:
      break;
  }
  return est;
}

}  // namespace qte
