#include "qte/shift.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <numbers>
#include <numeric>

#include "qte/errors.hpp"
#include "qte/rng.hpp"

namespace qte {

double shift_information(const DensityFit& fit0, std::span<const double> control) {
  double s = 0.0;
  for (double y : control) s += fit0.lpsi(y, 2);
  const double info = -s / static_cast<double>(control.size());
  if (!(info > 0.0) || !std::isfinite(info)) {
    fail(ErrorKind::DegenerateInfo, "estimated Fisher information is not positive");
  }
  return info;
}

double shift_variance(const DensityFit& fit0, std::span<const double> control, double p, std::size_t n) {
  const double info = shift_information(fit0, control);
  return 1.0 / (p * (1.0 - p) * info * static_cast<double>(n));
}

std::pair<TwoSampleView, TwoSampleView> split_halves(const TwoSampleView& view, std::uint64_t seed) {
  Rng rng(seed);
  auto halve = [&rng](std::span<const double> arm) {
    std::vector<double> shuffled(arm.begin(), arm.end());
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const std::size_t first = (shuffled.size() + 1) / 2;
    std::vector<double> a(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(first));
    std::vector<double> b(shuffled.begin() + static_cast<std::ptrdiff_t>(first), shuffled.end());
    return std::pair{std::move(a), std::move(b)};
  };
  auto [c_a, c_b] = halve(view.control());
  auto [t_a, t_b] = halve(view.treated());
  return {TwoSampleView(std::move(c_a), std::move(t_a)), TwoSampleView(std::move(c_b), std::move(t_b))};
}

// ---------------------------------------------------------------- WAQ

namespace {

double spacing(std::span<const double> sorted, std::size_t k) {
  if (sorted.size() < 2) return 0.0;
  if (k < 2) return sorted[1] - sorted[0];
  return sorted[k - 1] - sorted[k - 2];
}

// MAD of the pooled outcomes after centering each arm at its own median, so
// the scale is unchanged when the treated arm alone is shifted.
double pooled_mad(const TwoSampleView& view) {
  const double m0 = median(std::vector<double>(view.control().begin(), view.control().end()));
  const double m1 = median(std::vector<double>(view.treated().begin(), view.treated().end()));
  std::vector<double> pooled;
  pooled.reserve(view.n());
  for (double y : view.control()) pooled.push_back(y - m0);
  for (double y : view.treated()) pooled.push_back(y - m1);
  const double s = mad_scale(pooled);
  if (!(s > 0.0)) fail(ErrorKind::DegenerateScale, "median absolute deviation of the outcomes is zero");
  return s;
}

}  // namespace

WaqWeights waq_weights_cross(const DensityFit& fit0, const TwoSampleView& estimation, std::size_t n0_eval,
                             std::size_t n_total) {
  const auto c0 = estimation.control();
  const auto c1 = estimation.treated();
  const double m0 = static_cast<double>(c0.size());
  const double mad = pooled_mad(estimation);
  const double n = static_cast<double>(n_total);

  WaqWeights out;
  out.threshold = std::log(std::log(n)) / std::log(n) * std::pow(n, 0.25);
  out.u_grid.resize(n0_eval);
  out.w_tilde.resize(n0_eval);
  for (std::size_t i = 1; i <= n0_eval; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(n0_eval + 1);
    out.u_grid[i - 1] = u;
    out.w_tilde[i - 1] = fit0.lpsi(empirical_quantile(c0, u), 2);
  }
  // The normalizing sum can be near zero or negative for a rough fit; the
  // truncation statistic uses its magnitude.
  double total = std::accumulate(out.w_tilde.begin(), out.w_tilde.end(), 0.0);
  if (total == 0.0) {
    for (double v : out.w_tilde) total += std::abs(v);
  }
  total = std::abs(total);

  out.truncated.assign(n0_eval, false);
  double kept = 0.0;
  std::size_t n_kept = 0;
  for (std::size_t i = 0; i < n0_eval; ++i) {
    const double u = out.u_grid[i];
    const double gap = std::max(spacing(c0, quantile_index(c0.size(), u)), spacing(c1, quantile_index(c1.size(), u)));
    // |w~/sum w~| / (f_adhoc * MAD) with f_adhoc = (1/m0) / gap.
    const double stat = total > 0.0 ? std::abs(out.w_tilde[i] / total) * gap * m0 / mad
                                    : std::numeric_limits<double>::infinity();
    if (!(stat < out.threshold)) {
      out.truncated[i] = true;
    } else {
      kept += out.w_tilde[i];
      ++n_kept;
    }
  }
  if (n_kept == 0 || kept == 0.0 || !std::isfinite(kept)) {
    fail(ErrorKind::AllTruncated, "every WAQ weight was truncated or the survivors sum to zero");
  }
  out.w.assign(n0_eval, 0.0);
  for (std::size_t i = 0; i < n0_eval; ++i) {
    if (!out.truncated[i]) out.w[i] = out.w_tilde[i] / kept;
  }
  return out;
}

WaqWeights waq_weights(const DensityFit& fit0, const TwoSampleView& view) {
  return waq_weights_cross(fit0, view, view.n0(), view.n());
}

double waq_from_weights(const TwoSampleView& view, std::span<const double> w) {
  const std::size_t n0 = view.n0();
  if (w.size() != n0) fail(ErrorKind::BadConfig, "weight grid must have one entry per control unit");
  const auto y0 = view.control();
  const auto y1 = view.treated();
  double s = 0.0;
  for (std::size_t i = 1; i <= n0; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(n0 + 1);
    s += w[i - 1] * (y1[quantile_index(y1.size(), u) - 1] - y0[i - 1]);
  }
  return s;
}

Estimate waq_estimate_with_fit(const TwoSampleView& view, const DensityFit& fit0) {
  const WaqWeights weights = waq_weights(fit0, view);
  Estimate est;
  est.method = Method::Waq;
  est.tau_hat = waq_from_weights(view, weights.w);
  const double info = shift_information(fit0, view.control());
  est.var_hat = 1.0 / (view.p() * (1.0 - view.p()) * info * static_cast<double>(view.n()));
  est.diagnostics["information"] = info;
  est.diagnostics["truncated"] =
      static_cast<double>(std::count(weights.truncated.begin(), weights.truncated.end(), true));
  est.diagnostics["threshold"] = weights.threshold;
  return est;
}

Estimate waq_estimate(const TwoSampleView& view, const ShiftOptions& options) {
  // The weighted-quantile formula runs over the larger arm as control.
  if (view.n1() > view.n0()) {
    Estimate est = waq_estimate(view.swapped(), options);
    est.tau_hat = -est.tau_hat;
    est.diagnostics["swapped"] = 1.0;
    return est;
  }
  if (!options.split) {
    const DensityFit fit0 = fit_adaptive_density(view.control(), options.density);
    return waq_estimate_with_fit(view, fit0);
  }
  const auto [a, b] = split_halves(view, options.seed);
  const DensityFit fit_a = fit_adaptive_density(a.control(), options.density);
  const DensityFit fit_b = fit_adaptive_density(b.control(), options.density);
  const WaqWeights w_ab = waq_weights_cross(fit_a, a, b.n0(), view.n());
  const WaqWeights w_ba = waq_weights_cross(fit_b, b, a.n0(), view.n());
  const double tau_b = waq_from_weights(b, w_ab.w);
  const double tau_a = waq_from_weights(a, w_ba.w);
  const double info = 0.5 * (shift_information(fit_a, b.control()) + shift_information(fit_b, a.control()));
  Estimate est;
  est.method = Method::Waq;
  est.tau_hat = 0.5 * (tau_a + tau_b);
  est.var_hat = 1.0 / (view.p() * (1.0 - view.p()) * info * static_cast<double>(view.n()));
  est.diagnostics["information"] = info;
  est.diagnostics["split"] = 1.0;
  return est;
}

// ---------------------------------------------------------------- EIF

double eif_score(const DensityFit& fit0, const TwoSampleView& view, double tau) {
  double s1 = 0.0;
  for (double y : view.treated()) s1 += fit0.lpsi(y - tau, 1);
  double s0 = 0.0;
  for (double y : view.control()) s0 += fit0.lpsi(y, 1);
  return s1 / static_cast<double>(view.n1()) - s0 / static_cast<double>(view.n0());
}

namespace {

struct RootResult {
  double root = 0.0;
  double residual = 0.0;
  std::uintmax_t iterations = 0;
  bool bracketed = false;
};

// Expands [init - d, init + d] geometrically until the function changes sign
// or d exceeds 50 * scale, then solves with TOMS 748.
template <class F>
RootResult bracketed_root(F&& f, double init, double scale) {
  RootResult r;
  const double f0 = f(init);
  if (f0 == 0.0) {
    r.root = init;
    r.bracketed = true;
    return r;
  }
  const bool positive = f0 > 0.0;
  double lo = 0.0, hi = 0.0, flo = 0.0, fhi = 0.0;
  bool found = false;
  for (double d = 0.01 * scale; d <= 50.0 * scale; d *= 2.0) {
    const double a = init - d;
    const double fa = f(a);
    if ((fa > 0.0) != positive || fa == 0.0) {
      lo = a, flo = fa, hi = init, fhi = f0;
      found = true;
      break;
    }
    const double b = init + d;
    const double fb = f(b);
    if ((fb > 0.0) != positive || fb == 0.0) {
      lo = init, flo = f0, hi = b, fhi = fb;
      found = true;
      break;
    }
  }
  if (!found) return r;
  r.bracketed = true;
  if (flo == 0.0 || fhi == 0.0) {
    r.root = flo == 0.0 ? lo : hi;
    return r;
  }
  std::uintmax_t iters = 200;
  const auto bracket =
      boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52), iters);
  r.iterations = iters;
  const double fa = f(bracket.first);
  const double fb = f(bracket.second);
  r.root = std::abs(fa) <= std::abs(fb) ? bracket.first : bracket.second;
  r.residual = std::min(std::abs(fa), std::abs(fb));
  return r;
}

double outcome_scale(const TwoSampleView& view, const DensityFit& fit0) {
  std::vector<double> pooled(view.control().begin(), view.control().end());
  pooled.insert(pooled.end(), view.treated().begin(), view.treated().end());
  const double s = mad_scale(pooled);
  return s > 0.0 ? s : fit0.sigma_hat();
}

double score_scale(const DensityFit& fit0, const TwoSampleView& view, double tau) {
  double s = 0.0;
  for (double y : view.treated()) s += std::abs(fit0.lpsi(y - tau, 1));
  s /= static_cast<double>(view.n1());
  double s0 = 0.0;
  for (double y : view.control()) s0 += std::abs(fit0.lpsi(y, 1));
  return s + s0 / static_cast<double>(view.n0());
}

double median_difference(const TwoSampleView& view) {
  return empirical_quantile(view.treated(), 0.5) - empirical_quantile(view.control(), 0.5);
}

// Sum over one half of the efficient influence function built from a fit on
// the other half.
double psi_sum(const DensityFit& fit, double info, const TwoSampleView& half, double tau, double p) {
  double s = 0.0;
  for (double y : half.treated()) s -= fit.lpsi(y - tau, 1) / p;
  for (double y : half.control()) s += fit.lpsi(y, 1) / (1.0 - p);
  return s / info;
}

}  // namespace

Estimate eif_estimate_with_fit(const TwoSampleView& view, const DensityFit& fit0, EifMode mode, double init) {
  const double info = shift_information(fit0, view.control());
  Estimate est;
  est.method = Method::Eif;
  est.var_hat = 1.0 / (view.p() * (1.0 - view.p()) * info * static_cast<double>(view.n()));
  est.diagnostics["information"] = info;
  est.diagnostics["init"] = init;
  auto one_step = [&] { return init - eif_score(fit0, view, init) / info; };
  if (mode == EifMode::OneStep) {
    est.tau_hat = one_step();
    est.diagnostics["mode_root"] = 0.0;
    return est;
  }
  est.diagnostics["mode_root"] = 1.0;
  const RootResult r =
      bracketed_root([&](double t) { return eif_score(fit0, view, t); }, init, outcome_scale(view, fit0));
  if (!r.bracketed) {
    est.tau_hat = one_step();
    est.diagnostics["no_bracket"] = 1.0;
    return est;
  }
  est.tau_hat = r.root;
  est.diagnostics["iterations"] = static_cast<double>(r.iterations);
  est.diagnostics["residual"] = r.residual;
  est.diagnostics["score_scale"] = score_scale(fit0, view, r.root);
  return est;
}

Estimate eif_estimate(const TwoSampleView& view, const EifOptions& options) {
  const double init = options.init.value_or(median_difference(view));
  if (!options.split) {
    const DensityFit fit0 = fit_adaptive_density(view.control(), options.density);
    return eif_estimate_with_fit(view, fit0, options.mode, init);
  }
  const auto [a, b] = split_halves(view, options.seed);
  const DensityFit fit_a = fit_adaptive_density(a.control(), options.density);
  const DensityFit fit_b = fit_adaptive_density(b.control(), options.density);
  // Each half is scored with the density fitted on the other half.
  const double info_ab = shift_information(fit_b, a.control());
  const double info_ba = shift_information(fit_a, b.control());
  const double p = view.p();
  const double n = static_cast<double>(view.n());
  auto mean_psi = [&](double tau) {
    return (psi_sum(fit_b, info_ab, a, tau, p) + psi_sum(fit_a, info_ba, b, tau, p)) / n;
  };
  const double info = 0.5 * (info_ab + info_ba);
  Estimate est;
  est.method = Method::Eif;
  est.var_hat = 1.0 / (p * (1.0 - p) * info * n);
  est.diagnostics["information"] = info;
  est.diagnostics["init"] = init;
  est.diagnostics["split"] = 1.0;
  const double stepped = init + mean_psi(init);
  if (options.mode == EifMode::OneStep) {
    est.tau_hat = stepped;
    est.diagnostics["mode_root"] = 0.0;
    return est;
  }
  est.diagnostics["mode_root"] = 1.0;
  const RootResult r = bracketed_root(mean_psi, init, outcome_scale(view, fit_a));
  if (!r.bracketed) {
    est.tau_hat = stepped;
    est.diagnostics["no_bracket"] = 1.0;
    return est;
  }
  est.tau_hat = r.root;
  est.diagnostics["iterations"] = static_cast<double>(r.iterations);
  est.diagnostics["residual"] = r.residual;
  return est;
}

// ---------------------------------------------------------------- oracles

OracleWeight optimal_weight_oracle(const Law& law, double u) {
  if (!(u > 0.0 && u < 1.0)) fail(ErrorKind::BadQuantile, "weight oracle needs u in (0,1)");
  switch (law.kind()) {
    case LawKind::Normal: return {1.0, false};
    case LawKind::Laplace: return {0.0, true};
    case LawKind::Cauchy: {
      const double s = std::sin(std::numbers::pi * u);
      return {-2.0 * std::cos(2.0 * std::numbers::pi * u) * s * s / 0.5, false};
    }
    case LawKind::Huber: {
      const auto& h = *law.huber_params();
      const double inside = (u > h.alpha() && u < 1.0 - h.beta()) ? 1.0 : 0.0;
      return {inside / (1.0 - h.alpha() - h.beta()), false};
    }
  }
  fail(ErrorKind::BadLaw, "no closed-form weight for this law");
}

double efficient_weight_from_score(const Law& law, double u) {
  return -law.score_derivative(law.quantile(u)) / law.fisher_information();
}

}  // namespace qte
