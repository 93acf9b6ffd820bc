#include "qte/trimmed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qte/errors.hpp"

namespace qte {

void validate(const TrimSpec& spec) {
  if (!(spec.alpha >= 0.0 && spec.alpha < 1.0 && spec.beta >= 0.0 && spec.beta < 1.0) ||
      !(spec.alpha + spec.beta < 1.0)) {
    fail(ErrorKind::BadTrim, "trim fractions need alpha, beta in [0,1) and alpha + beta < 1");
  }
}

ArmTrim arm_trim(std::size_t m, const TrimSpec& spec) {
  const double denom = static_cast<double>(m + 1);
  const double upper = 1.0 - spec.beta;
  ArmTrim t;
  t.m = m;
  // left = #{i : i/(m+1) <= alpha}; start from the estimate and settle by
  // direct comparison so the boundary convention is exact.
  auto left = static_cast<std::size_t>(std::min<double>(std::floor(spec.alpha * denom), static_cast<double>(m)));
  while (left < m && static_cast<double>(left + 1) / denom <= spec.alpha) ++left;
  while (left > 0 && static_cast<double>(left) / denom > spec.alpha) --left;
  auto first_right = static_cast<std::size_t>(std::max(1.0, std::floor(upper * denom)));
  while (first_right > 1 && static_cast<double>(first_right - 1) / denom > upper) --first_right;
  while (first_right <= m && !(static_cast<double>(first_right) / denom > upper)) ++first_right;
  t.left = left;
  t.right = first_right <= m ? m + 1 - first_right : 0;
  if (t.left + t.right > m) t.right = m - t.left;
  return t;
}

double trimmed_mean(std::span<const double> x, const TrimSpec& spec) {
  validate(spec);
  const ArmTrim t = arm_trim(x.size(), spec);
  if (t.interior() == 0) {
    const double mid = 0.5 * (spec.alpha + 1.0 - spec.beta);
    return empirical_quantile(x, std::clamp(mid, 1e-12, 1.0));
  }
  return mean(x.subspan(t.left, t.interior()));
}

double winsorized_mean(std::span<const double> x, const TrimSpec& spec) {
  validate(spec);
  const ArmTrim t = arm_trim(x.size(), spec);
  if (t.interior() == 0) return trimmed_mean(x, spec);
  const double lo = x[t.left];
  const double hi = x[t.m - t.right - 1];
  double s = static_cast<double>(t.left) * lo + static_cast<double>(t.right) * hi;
  for (std::size_t i = t.left; i < t.m - t.right; ++i) s += x[i];
  return s / static_cast<double>(t.m);
}

TrimVarianceTable::TrimVarianceTable(std::span<const double> sorted_arm) : x_(sorted_arm) {
  const std::size_t m = x_.size();
  center_ = x_[(m - 1) / 2];
  p1_.assign(m + 1, 0.0);
  p2_.assign(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double v = at(i);
    p1_[i + 1] = p1_[i] + v;
    p2_[i + 1] = p2_[i] + v * v;
  }
}

TrimVarianceTable::Moments TrimVarianceTable::range(std::size_t a, std::size_t b) const {
  return {p1_[b] - p1_[a], p2_[b] - p2_[a]};
}

// Quantile-density estimate 1/f(F^-1(level)) from order-statistic spacings
// over a window of half-width m^(-1/3) / 2 in probability.
double TrimVarianceTable::quantile_spacing(double level) const {
  const double m = static_cast<double>(x_.size());
  const double delta = 0.5 * std::pow(m, -1.0 / 3.0);
  const double lo = std::max(level - delta, 0.5 / m);
  const double hi = std::min(level + delta, 1.0);
  if (!(hi > lo)) return 0.0;
  return (empirical_quantile(x_, hi) - empirical_quantile(x_, lo)) / (hi - lo);
}

double TrimVarianceTable::trimmed(const TrimSpec& spec) const {
  const ArmTrim t = arm_trim(x_.size(), spec);
  const std::size_t k = t.interior();
  if (k == 0) return std::numeric_limits<double>::infinity();
  const double m = static_cast<double>(t.m);
  const std::size_t first = t.left;
  const std::size_t last = t.m - t.right - 1;
  // Tail clamps sit halfway between the outermost interior point and its
  // trimmed neighbour.
  const double q_lo = t.left > 0 ? 0.5 * (at(first - 1) + at(first)) : at(first);
  const double q_hi = t.right > 0 ? 0.5 * (at(last) + at(last + 1)) : at(last);
  const Moments mo = range(first, last + 1);
  const double nl = static_cast<double>(t.left);
  const double nr = static_cast<double>(t.right);
  const double kd = static_cast<double>(k);
  const double mu = (mo.s1 + nl * q_lo + nr * q_hi) / m;
  const double mean_int = mo.s1 / kd;
  const double ss_int = std::max(0.0, mo.s2 - mo.s1 * mean_int) + kd * (mean_int - mu) * (mean_int - mu);
  const double ss = ss_int + nl * (q_lo - mu) * (q_lo - mu) + nr * (q_hi - mu) * (q_hi - mu);
  const double frac = kd / m;
  return ss / m / (frac * frac);
}

double TrimVarianceTable::winsorized(const TrimSpec& spec) const {
  const ArmTrim t = arm_trim(x_.size(), spec);
  const std::size_t k = t.interior();
  if (k == 0) return std::numeric_limits<double>::infinity();
  const double m = static_cast<double>(t.m);
  const std::size_t first = t.left;
  const std::size_t last = t.m - t.right - 1;
  const double nl = static_cast<double>(t.left);
  const double nr = static_cast<double>(t.right);
  // Influence of the winsorized mean: identity inside, and in each tail the
  // clamp value shifted by (tail mass) / f at the clamp quantile.
  const double w_lo = t.left > 0 ? at(first) - (nl / m) * quantile_spacing(nl / m) : 0.0;
  const double w_hi = t.right > 0 ? at(last) + (nr / m) * quantile_spacing(1.0 - nr / m) : 0.0;
  const Moments mo = range(first, last + 1);
  const double kd = static_cast<double>(k);
  const double mu = (mo.s1 + nl * w_lo + nr * w_hi) / m;
  const double mean_int = mo.s1 / kd;
  const double ss_int = std::max(0.0, mo.s2 - mo.s1 * mean_int) + kd * (mean_int - mu) * (mean_int - mu);
  const double ss = ss_int + nl * (w_lo - mu) * (w_lo - mu) + nr * (w_hi - mu) * (w_hi - mu);
  return ss / m;
}

double sigma2_hat(std::span<const double> sorted_arm, const TrimSpec& spec) {
  validate(spec);
  if (sorted_arm.size() < 3) fail(ErrorKind::TooFewPoints, "trimmed variance needs at least 3 points");
  return TrimVarianceTable(sorted_arm).trimmed(spec);
}

double sigma2_wins_hat(std::span<const double> sorted_arm, const TrimSpec& spec) {
  validate(spec);
  if (sorted_arm.size() < 3) fail(ErrorKind::TooFewPoints, "winsorized variance needs at least 3 points");
  return TrimVarianceTable(sorted_arm).winsorized(spec);
}

namespace {

Estimate finish(const TwoSampleView& view, const TrimSpec& spec, Method method, double tau, double s1,
                double s0) {
  Estimate est;
  est.method = method;
  est.tau_hat = tau;
  if (std::isfinite(s1) && std::isfinite(s0)) {
    est.var_hat = s1 / static_cast<double>(view.n1()) + s0 / static_cast<double>(view.n0());
  }
  est.diagnostics["alpha"] = spec.alpha;
  est.diagnostics["beta"] = spec.beta;
  return est;
}

}  // namespace

Estimate trimmed_tau(const TwoSampleView& view, const TrimSpec& spec) {
  validate(spec);
  const double tau = trimmed_mean(view.treated(), spec) - trimmed_mean(view.control(), spec);
  const double s1 = view.n1() >= 3 ? TrimVarianceTable(view.treated()).trimmed(spec) : NAN;
  const double s0 = view.n0() >= 3 ? TrimVarianceTable(view.control()).trimmed(spec) : NAN;
  return finish(view, spec, Method::Trimmed, tau, s1, s0);
}

Estimate winsorized_tau(const TwoSampleView& view, const TrimSpec& spec) {
  validate(spec);
  const double tau = winsorized_mean(view.treated(), spec) - winsorized_mean(view.control(), spec);
  const double s1 = view.n1() >= 3 ? TrimVarianceTable(view.treated()).winsorized(spec) : NAN;
  const double s0 = view.n0() >= 3 ? TrimVarianceTable(view.control()).winsorized(spec) : NAN;
  return finish(view, spec, Method::Winsorized, tau, s1, s0);
}

namespace {

std::vector<double> level_grid(double a0, double a1, double step) {
  std::vector<double> g{a0};
  for (long i = static_cast<long>(std::ceil(a0 / step)); i * step < a1; ++i) {
    const double v = static_cast<double>(i) * step;
    if (v > a0) g.push_back(v);
  }
  if (a1 > a0) g.push_back(a1);
  return g;
}

struct Candidate {
  double alpha = 0.0;
  double beta = 0.0;
  double objective = std::numeric_limits<double>::infinity();
};

// Smaller objective wins; ties prefer less total trimming, then smaller beta.
bool better(const Candidate& a, const Candidate& b) {
  if (a.objective != b.objective) return a.objective < b.objective;
  if (a.alpha + a.beta != b.alpha + b.beta) return a.alpha + a.beta < b.alpha + b.beta;
  return a.beta < b.beta;
}

}  // namespace

Estimate adapt_trim(const TwoSampleView& view, const AdaptTrimOptions& options) {
  if (!(options.alpha0 >= 0.0 && options.alpha0 <= options.alpha1 && options.alpha1 < 1.0)) {
    fail(ErrorKind::BadTrim, "adaptive trim range needs 0 <= alpha0 <= alpha1 < 1");
  }
  if (view.n0() < 3 || view.n1() < 3) fail(ErrorKind::TooFewPoints, "adaptive trim needs 3 points per arm");
  const TrimVarianceTable t1(view.treated());
  const TrimVarianceTable t0(view.control());
  const double p = view.p();
  const bool wins = options.estimator == TrimEstimator::Wins;

  auto objective = [&](double a, double b) {
    const TrimSpec s{a, b, options.mode};
    if (!(a + b < 1.0)) return std::numeric_limits<double>::infinity();
    const double v1 = wins ? t1.winsorized(s) : t1.trimmed(s);
    const double v0 = wins ? t0.winsorized(s) : t0.trimmed(s);
    return v1 / p + v0 / (1.0 - p);
  };

  auto search = [&](const std::vector<double>& alphas, const std::vector<double>& betas,
                    std::vector<Candidate>* curve) {
    Candidate best;
    auto consider = [&](double a, double b) {
      const Candidate c{a, b, objective(a, b)};
      if (curve) curve->push_back(c);
      if (better(c, best)) best = c;
    };
    switch (options.mode) {
      case TrimMode::Symmetric:
        for (double a : alphas) consider(a, a);
        break;
      case TrimMode::RightOnly:
        for (double b : betas) consider(0.0, b);
        break;
      case TrimMode::Asymmetric:
        for (double a : alphas) {
          for (double b : betas) consider(a, b);
        }
        break;
    }
    return best;
  };

  constexpr double kCoarse = 1.0 / 200.0;
  constexpr double kFine = 1.0 / 2000.0;
  const std::vector<double> coarse = level_grid(options.alpha0, options.alpha1, kCoarse);
  std::vector<Candidate> curve;
  Candidate best = search(coarse, coarse, &curve);
  if (!std::isfinite(best.objective)) fail(ErrorKind::BadTrim, "no admissible trim fractions in range");

  auto refine = [&](double center) {
    const double lo = std::max(options.alpha0, center - kCoarse);
    const double hi = std::min(options.alpha1, center + kCoarse);
    return level_grid(lo, hi, kFine);
  };
  const Candidate fine = search(refine(best.alpha), refine(best.beta), nullptr);
  if (better(fine, best)) best = fine;

  const TrimSpec chosen{best.alpha, best.beta, options.mode};
  Estimate est = wins ? winsorized_tau(view, chosen) : trimmed_tau(view, chosen);
  est.diagnostics["alpha_hat"] = best.alpha;
  est.diagnostics["beta_hat"] = best.beta;
  est.diagnostics["objective"] = best.objective;
  est.var_hat = best.objective / static_cast<double>(view.n());
  auto& ca = est.series["curve_alpha"];
  auto& cb = est.series["curve_beta"];
  auto& co = est.series["curve_objective"];
  for (const auto& c : curve) {
    ca.push_back(c.alpha);
    cb.push_back(c.beta);
    co.push_back(c.objective);
  }
  return est;
}

}  // namespace qte
