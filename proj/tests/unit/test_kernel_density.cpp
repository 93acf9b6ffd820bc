#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>

#include "qte/errors.hpp"
#include "qte/extended_huber.hpp"
#include "qte/kernel_density.hpp"
#include "qte/laws.hpp"
#include "qte/reference/kernel_density_serial.hpp"
#include "qte/sample.hpp"

using namespace qte;

namespace {

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace

TEST(Triweight, KernelIsADensityWithMatchingDerivatives) {
  using boost::math::quadrature::gauss_kronrod;
  EXPECT_NEAR((gauss_kronrod<double, 61>::integrate(triweight::k0, -1.0, 1.0)), 1.0, 1e-14);
  EXPECT_NEAR((gauss_kronrod<double, 61>::integrate([](double u) { return u * triweight::k0(u); }, -1.0, 1.0)), 0.0,
              1e-15);
  for (double u : {-0.9, -0.4, 0.0, 0.3, 0.77}) {
    const double h = 1e-6;
    EXPECT_NEAR(triweight::k1(u), (triweight::k0(u + h) - triweight::k0(u - h)) / (2 * h), 1e-8);
    EXPECT_NEAR(triweight::k2(u), (triweight::k1(u + h) - triweight::k1(u - h)) / (2 * h), 1e-7);
  }
  EXPECT_EQ(triweight::k0(1.2), 0.0);
  EXPECT_EQ(triweight::k1(-1.5), 0.0);
}

TEST(KernelDensity, RobustSigmaFromOrderStatistics) {
  std::vector<double> x(100);
  for (int i = 0; i < 100; ++i) x[i] = i;
  // q_0.05 = X_(5) = 4 and q_0.95 = X_(95) = 94.
  EXPECT_NEAR(robust_sigma(x), 90.0 / (2 * 1.6449), 1e-12);
  std::vector<double> scaled(x);
  for (double& v : scaled) v *= 10.0;
  EXPECT_NEAR(robust_sigma(scaled), 10.0 * robust_sigma(x), 1e-9);
}

TEST(KernelDensity, GridAndBandwidths) {
  const auto data = Law::normal().sample(5000, 3);
  std::vector<double> sorted(data);
  std::sort(sorted.begin(), sorted.end());
  const DensityFit fit = fit_adaptive_density(data);
  ASSERT_EQ(fit.grid().size(), kDensityGridSize);
  for (std::size_t k = 1; k <= kDensityGridSize; ++k) {
    const std::size_t idx = (5000 * k + 999) / 1000;
    ASSERT_EQ(fit.grid()[k - 1], sorted[idx - 1]);
  }
  const double s = robust_sigma(sorted);
  EXPECT_NEAR(fit.h(), 3.15 * s * std::pow(5000.0, -0.2), 1e-12);
  EXPECT_NEAR(fit.h1(), 2.83 * s * std::pow(5000.0, -1.0 / 7.0), 1e-12);
  EXPECT_NEAR(fit.h2(), 2.70 * s * std::pow(5000.0, -1.0 / 9.0), 1e-12);
}

TEST(KernelDensity, LocalFactorsHaveUnitGeometricMean) {
  const auto data = Law::laplace().sample(3000, 5);
  const DensityFit fit = fit_adaptive_density(data);
  double log_sum = 0.0;
  for (double l : fit.lambda()) log_sum += std::log(l);
  EXPECT_NEAR(log_sum / static_cast<double>(fit.lambda().size()), 0.0, 1e-12);
}

TEST(KernelDensity, ParallelMatchesSerialReferenceBitForBit) {
  for (const Law& law : {Law::normal(), Law::cauchy(), Law::huber(0.5, 2.0)}) {
    const auto data = law.sample(4000, 17);
    const DensityFit a = fit_adaptive_density(data);
    const DensityFit b = reference::fit_adaptive_density_serial(data);
    EXPECT_EQ(a.h(), b.h());
    EXPECT_EQ(a.g(), b.g());
    EXPECT_TRUE(std::equal(a.lambda().begin(), a.lambda().end(), b.lambda().begin())) << law.name();
    EXPECT_TRUE(std::equal(a.fhat().begin(), a.fhat().end(), b.fhat().begin())) << law.name();
    EXPECT_TRUE(std::equal(a.fhat1().begin(), a.fhat1().end(), b.fhat1().begin())) << law.name();
    EXPECT_TRUE(std::equal(a.fhat2().begin(), a.fhat2().end(), b.fhat2().begin())) << law.name();
  }
}

TEST(KernelDensity, RecoversNormalDensity) {
  const auto data = Law::normal().sample(20000, 23);
  const DensityFit fit = fit_adaptive_density(data);
  EXPECT_NEAR(fit.integral_f(), 1.0, 0.01);
  for (double x : {-1.5, -0.7, 0.0, 0.6, 1.4}) EXPECT_NEAR(fit.density(x), Law::normal().pdf(x), 0.02) << x;
  // Int f^2 for the standard normal is 1 / (2 sqrt(pi)).
  EXPECT_NEAR(fit.integral_f_squared(), 0.5 / std::sqrt(M_PI), 0.01);
}

// Expected value of the adaptive estimator for standard normal data, with
// the pilot and the local factors replaced by their population limits.
struct SmoothedNormalTarget {
  double h, h1, h2, g;

  explicit SmoothedNormalTarget(double m) {
    const double sigma = (normal_quantile(0.95) - normal_quantile(0.05)) / (2.0 * 1.6449);
    h = 3.15 * sigma * std::pow(m, -1.0 / 5.0);
    h1 = 2.83 * sigma * std::pow(m, -1.0 / 7.0);
    h2 = 2.70 * sigma * std::pow(m, -1.0 / 9.0);
    g = 1.0;
    g = std::exp(integrate([this](double y) { return std::log(pilot(y)) * phi(y); }, -9.0, 9.0));
  }

  static double phi(double y) { return std::exp(-0.5 * y * y) / std::sqrt(2.0 * M_PI); }
  template <class F>
  static double integrate(F f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-12);
  }
  double pilot(double y) const {
    return boost::math::quadrature::gauss<double, 40>::integrate(
        [&](double t) { return triweight::k0(t) * phi(y - h * t); }, -1.0, 1.0);
  }
  double lambda(double y) const { return std::pow(pilot(y) / g, -0.5); }
  double expected(double x, int order) const {
    const double b = order == 0 ? h : (order == 1 ? h1 : h2);
    return integrate(
        [&](double y) {
          const double bl = b * lambda(y);
          const double u = (x - y) / bl;
          const double k = order == 0 ? triweight::k0(u) : (order == 1 ? triweight::k1(u) : triweight::k2(u));
          return k / std::pow(bl, order + 1) * phi(y);
        },
        x - 5.0, x + 5.0);
  }
};

// Per-sample derivative estimates are noisy, so compare the average over
// many samples with the smoothed target rather than the raw normal values.
TEST(KernelDensity, LogDerivativesAverageToSmoothedTarget) {
  const std::size_t m = 5000;
  const int reps = 24;
  const std::vector<double> xs{-1.5, -0.7, 0.0, 0.6, 1.4};
  std::vector<double> l1(xs.size(), 0.0), l2(xs.size(), 0.0);
  for (int r = 0; r < reps; ++r) {
    const DensityFit fit = fit_adaptive_density(Law::normal().sample(m, 300 + r));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      l1[i] += fit.lpsi(xs[i], 1) / reps;
      l2[i] += fit.lpsi(xs[i], 2) / reps;
    }
  }
  const SmoothedNormalTarget target(static_cast<double>(m));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = target.expected(xs[i], 0);
    const double f1 = target.expected(xs[i], 1);
    const double f2 = target.expected(xs[i], 2);
    EXPECT_NEAR(l1[i], f1 / f, 0.08) << xs[i];
    EXPECT_NEAR(l2[i], f2 / f - (f1 / f) * (f1 / f), 0.25) << xs[i];
  }
}

// Naive O(m^2) evaluation of the two-stage estimator on the fit's own grid.
TEST(KernelDensity, MatchesDirectKernelSums) {
  auto x = Law::laplace().sample(400, 31);
  std::sort(x.begin(), x.end());
  const DensityFit fit = fit_adaptive_density(x);
  const double m = static_cast<double>(x.size());
  const double sigma = (x[379] - x[19]) / (2.0 * 1.6449);
  const double h = 3.15 * sigma * std::pow(m, -0.2);
  const double h1 = 2.83 * sigma * std::pow(m, -1.0 / 7.0);
  const double h2 = 2.70 * sigma * std::pow(m, -1.0 / 9.0);
  std::vector<double> lambda(x.size());
  double log_g = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double s = 0.0;
    for (double xj : x) s += triweight::k0((x[i] - xj) / h);
    lambda[i] = s / (m * h);
    log_g += std::log(lambda[i]) / m;
  }
  for (double& l : lambda) l = std::pow(l / std::exp(log_g), -0.5);
  for (std::size_t k = 0; k < fit.grid().size(); k += 7) {
    const double t = fit.grid()[k];
    double f = 0.0, f1 = 0.0, f2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      f += triweight::k0((t - x[i]) / (h * lambda[i])) / (h * lambda[i]) / m;
      f1 += triweight::k1((t - x[i]) / (h1 * lambda[i])) / std::pow(h1 * lambda[i], 2) / m;
      f2 += triweight::k2((t - x[i]) / (h2 * lambda[i])) / std::pow(h2 * lambda[i], 3) / m;
    }
    EXPECT_LT(rel_diff(fit.fhat()[k], f), 1e-12) << t;
    EXPECT_LT(rel_diff(fit.fhat1()[k], f1), 1e-12) << t;
    EXPECT_LT(rel_diff(fit.fhat2()[k], f2), 1e-12) << t;
    EXPECT_LT(rel_diff(fit.lpsi2()[k], f2 / f - (f1 / f) * (f1 / f)), 1e-9) << t;
  }
}

TEST(KernelDensity, InterpolationAndExtrapolation) {
  const auto data = Law::normal().sample(2000, 29);
  const DensityFit fit = fit_adaptive_density(data);
  const auto g = fit.grid();
  const auto l1 = fit.lpsi1();
  EXPECT_EQ(fit.lpsi(g[10], 1), l1[10]);
  EXPECT_EQ(fit.lpsi(g.front() - 5.0, 1), l1.front());
  EXPECT_EQ(fit.lpsi(g.back() + 5.0, 1), l1.back());
  if (g[101] > g[100]) {
    const double mid = 0.5 * (g[100] + g[101]);
    EXPECT_NEAR(fit.lpsi(mid, 1), 0.5 * (l1[100] + l1[101]), 1e-12);
    // log_density is an antiderivative of the interpolated lpsi1.
    const double h = 1e-6 * (g[101] - g[100]);
    EXPECT_NEAR((fit.log_density(mid + h) - fit.log_density(mid - h)) / (2 * h), fit.lpsi(mid, 1), 1e-5);
  }
}

TEST(KernelDensity, LocationEquivariance) {
  const auto data = Law::cauchy().sample(3000, 31);
  std::vector<double> shifted(data);
  for (double& v : shifted) v += 7.25;
  const DensityFit a = fit_adaptive_density(data);
  const DensityFit b = fit_adaptive_density(shifted);
  for (std::size_t k = 0; k < kDensityGridSize; ++k) {
    ASSERT_NEAR(b.grid()[k], a.grid()[k] + 7.25, 1e-10 * std::max(1.0, std::abs(a.grid()[k])));
    ASSERT_LT(rel_diff(a.fhat()[k], b.fhat()[k]), 1e-10);
    ASSERT_LT(rel_diff(a.lpsi1()[k], b.lpsi1()[k]), 1e-10);
    ASSERT_LT(rel_diff(a.lpsi2()[k], b.lpsi2()[k]), 1e-10);
  }
}

TEST(KernelDensity, ScaleEquivariance) {
  const auto data = Law::laplace().sample(3000, 37);
  const double s = 4.0;
  std::vector<double> scaled(data);
  for (double& v : scaled) v *= s;
  const DensityFit a = fit_adaptive_density(data);
  const DensityFit b = fit_adaptive_density(scaled);
  for (std::size_t k = 0; k < kDensityGridSize; ++k) {
    ASSERT_LT(rel_diff(b.grid()[k], s * a.grid()[k]), 1e-10);
    ASSERT_LT(rel_diff(b.fhat()[k] * s, a.fhat()[k]), 1e-10);
    ASSERT_LT(rel_diff(b.lpsi1()[k] * s, a.lpsi1()[k]), 1e-10);
    ASSERT_LT(rel_diff(b.lpsi2()[k] * s * s, a.lpsi2()[k]), 1e-10);
  }
}

TEST(KernelDensity, Errors) {
  EXPECT_THROW(fit_adaptive_density(std::vector<double>(50, 1.0)), Error);
  try {
    fit_adaptive_density(std::vector<double>(500, 1.0));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateScale);
  }
  try {
    fit_adaptive_density(std::vector<double>(10, 1.0));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooFewPoints);
  }
}
