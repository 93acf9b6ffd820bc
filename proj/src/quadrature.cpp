#include "qte/quadrature.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <algorithm>
#include <cmath>

#include "qte/errors.hpp"

namespace qte {

WeightMeasure WeightMeasure::point_mass(double u, double mass) {
  WeightMeasure w;
  w.atoms.emplace_back(u, mass);
  return w;
}

WeightMeasure WeightMeasure::uniform(double lo, double hi) {
  if (!(lo >= 0.0 && hi <= 1.0 && lo < hi)) fail(ErrorKind::BadParams, "uniform weight needs 0 <= lo < hi <= 1");
  const double height = 1.0 / (hi - lo);
  return from_density([height](double) { return height; }, lo, hi);
}

WeightMeasure WeightMeasure::from_density(std::function<double(double)> w, double lo, double hi) {
  WeightMeasure out;
  out.density = std::move(w);
  out.lo = lo;
  out.hi = hi;
  return out;
}

namespace {

// The integrator grows its abscissa tables lazily, so nested integrals use
// separate per-thread instances.
boost::math::quadrature::tanh_sinh<double>& integrator(int depth) {
  thread_local boost::math::quadrature::tanh_sinh<double> outer;
  thread_local boost::math::quadrature::tanh_sinh<double> inner;
  return depth == 0 ? outer : inner;
}

template <class F>
double integrate(F f, double a, double b, int depth = 1) {
  if (!(a < b)) return 0.0;
  if (b - a <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)})) return (b - a) * f(0.5 * (a + b));
  double err = 0.0;
  double l1 = 0.0;
  const double v = integrator(depth).integrate(f, a, b, 1e-12, &err, &l1);
  if (!std::isfinite(v) || err > 1e-8 * std::max(1.0, l1)) {
    fail(ErrorKind::NonIntegrable, "adaptive quadrature did not converge");
  }
  return v;
}

// Integral over [a, b] in (0,1) after the substitutions t = e^v on (0, 1/2]
// and 1 - t = e^v on [1/2, 1), which flatten the 1/t and 1/(1-t) growth of
// integrands built from 1/q.
template <class F>
double integrate_u(F f, double a, double b, int depth = 1) {
  if (!(a < b)) return 0.0;
  double total = 0.0;
  const double mid = std::clamp(0.5, a, b);
  if (a < mid) {
    total += integrate([&](double v) {
      const double t = std::exp(v);
      return f(t) * t;
    }, std::log(a), std::log(mid), depth);
  }
  if (mid < b) {
    total += integrate([&](double v) {
      const double r = std::exp(v);
      return f(1.0 - r) * r;
    }, std::log1p(-b), std::log1p(-mid), depth);
  }
  return total;
}

// Mass of (0,1) dropped at each end; keeps 1/q(u) within a range where the
// quadrature converges.
constexpr double kTailCut = 1e-12;

// All integrals are taken in u = F(x), where dx = du / q(u) and q = f(F^{-1}).
struct Integrals {
  const Law& law;
  const WeightMeasure& w;
  double lo = std::max(w.lo, kTailCut);
  double hi = std::min(w.hi, 1.0 - kTailCut);

  bool has_density() const { return static_cast<bool>(w.density); }

  double q(double u) const { return law.pdf(law.quantile(u)); }

  // w(u) / q(u), taken as zero where the quantile function overflows.
  double wq(double u) const {
    const double qu = q(u);
    if (!(qu > 0.0) || !std::isfinite(qu)) return 0.0;
    return w.density(u) / qu;
  }

  // int_{lo}^{s} t w(t) / q(t) dt
  double lower(double s) const {
    if (!has_density()) return 0.0;
    return integrate_u([&](double t) { return t * wq(t); }, lo, std::min(s, hi));
  }
  // int_{s}^{hi} (1 - t) w(t) / q(t) dt
  double upper(double s) const {
    if (!has_density()) return 0.0;
    return integrate_u([&](double t) { return (1.0 - t) * wq(t); }, std::max(s, lo), hi);
  }
  // int (min(s,t) - st) w(t) / q(t) dt
  // Each term is skipped where its coefficient vanishes, since the other
  // factor can diverge at the ends of (0,1).
  double inner(double s) const {
    double v = 0.0;
    if (s < 1.0) v += (1.0 - s) * lower(s);
    if (s > 0.0) v += s * upper(s);
    return v;
  }
};

}  // namespace

double sigma_f2_quadrature(const Law& law, const WeightMeasure& w) {
  const Integrals in{law, w};
  double total = 0.0;
  if (in.has_density()) {
    total += integrate_u([&](double s) { return in.wq(s) * in.inner(s); }, in.lo, in.hi, 0);
  }
  for (const auto& [s, m] : w.atoms) {
    const double qs = in.q(s);
    total += 2.0 * m / qs * in.inner(s);
    for (const auto& [t, mt] : w.atoms) total += m * mt * (std::min(s, t) - s * t) / (qs * in.q(t));
  }
  if (!std::isfinite(total)) fail(ErrorKind::NonIntegrable, "variance integral is not finite");
  return total;
}

double psi_from_W(const Law& law, const WeightMeasure& w, double x) {
  const Integrals in{law, w};
  const double fx = law.cdf(x);
  double psi = in.lower(fx) - in.upper(fx);
  for (const auto& [s, m] : w.atoms) {
    const double indicator = fx <= s ? 1.0 : 0.0;
    psi -= m * (indicator - s) / in.q(s);
  }
  return psi;
}

double W_from_psi(const Law& law, const std::function<double(double)>& psi_prime, double t) {
  if (!(t >= 0.0 && t <= 1.0)) fail(ErrorKind::BadQuantile, "t must lie in [0,1]");
  auto g = [&](double u) { return psi_prime(law.quantile(u)); };
  const double total = integrate_u(g, kTailCut, 1.0 - kTailCut, 0);
  if (!(std::abs(total) > 0.0)) fail(ErrorKind::NonIntegrable, "psi has zero total variation");
  return integrate_u(g, kTailCut, std::min(t, 1.0 - kTailCut), 0) / total;
}

}  // namespace qte
