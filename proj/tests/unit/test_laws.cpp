#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "qte/errors.hpp"
#include "qte/extended_huber.hpp"
#include "qte/laws.hpp"

using namespace qte;

namespace {

double integrate(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

std::vector<Law> all_laws() {
  return {Law::normal(), Law::laplace(), Law::cauchy(), Law::huber(0.5, 0.5), Law::huber(0.5, 2.0),
          Law::huber(1.0, 3.0)};
}

}  // namespace

TEST(ExtendedHuber, DensityIntegratesToOne) {
  for (auto [k1, k2] : {std::pair{0.5, 0.5}, {0.5, 2.0}, {1.0, 3.0}, {2.0, 0.7}}) {
    const ExtendedHuber h(k1, k2);
    const double total = integrate([&](double x) { return h.pdf(x); }, -k1, k2) +
                         integrate([&](double x) { return h.pdf(x); }, -std::numeric_limits<double>::infinity(), -k1) +
                         integrate([&](double x) { return h.pdf(x); }, k2, std::numeric_limits<double>::infinity());
    EXPECT_NEAR(total, 1.0, 1e-10) << k1 << "," << k2;
  }
}

TEST(ExtendedHuber, TailMassesMatchClosedForm) {
  for (auto [k1, k2] : {std::pair{0.5, 0.5}, {0.5, 2.0}, {1.0, 3.0}}) {
    const ExtendedHuber h(k1, k2);
    EXPECT_NEAR(h.alpha(), h.cdf(-k1), 1e-14);
    EXPECT_NEAR(h.beta(), 1.0 - h.cdf(k2), 1e-14);
    EXPECT_NEAR(h.alpha(), h.pdf(-k1) / k1, 1e-14);
    EXPECT_NEAR(h.beta(), h.pdf(k2) / k2, 1e-14);
  }
  // Values used by the adaptive-trim consistency check.
  const ExtendedHuber h(0.5, 2.0);
  EXPECT_NEAR(h.alpha(), 0.503, 5e-4);
  EXPECT_NEAR(h.beta(), 0.0193, 5e-4);
}

TEST(ExtendedHuber, ContinuousAcrossKinks) {
  const ExtendedHuber h(0.8, 1.7);
  for (double k : {-0.8, 1.7}) {
    EXPECT_NEAR(h.pdf(k - 1e-12), h.pdf(k + 1e-12), 1e-10);
    EXPECT_NEAR(h.score(k - 1e-12), h.score(k + 1e-12), 1e-10);
  }
}

TEST(ExtendedHuber, RejectsNonPositiveKinks) {
  EXPECT_THROW(ExtendedHuber(0.0, 1.0), Error);
  EXPECT_THROW(ExtendedHuber(1.0, -1.0), Error);
}

TEST(Laws, QuantileInvertsCdf) {
  for (const Law& law : all_laws()) {
    for (int i = 1; i < 200; ++i) {
      const double u = i / 200.0;
      EXPECT_NEAR(law.cdf(law.quantile(u)), u, 1e-12) << law.name();
    }
  }
}

TEST(Laws, ScoreIsLogDensityDerivative) {
  for (const Law& law : all_laws()) {
    for (double x : {-2.3, -0.31, 0.17, 0.9, 2.6}) {
      const double h = 1e-5;
      const double fd = (std::log(law.pdf(x + h)) - std::log(law.pdf(x - h))) / (2 * h);
      EXPECT_NEAR(law.score(x), fd, 1e-6) << law.name() << " x=" << x;
      const double fd2 = (law.score(x + h) - law.score(x - h)) / (2 * h);
      EXPECT_NEAR(law.score_derivative(x), fd2, 1e-5) << law.name() << " x=" << x;
    }
  }
}

TEST(Laws, FisherInformationMatchesIntegral) {
  for (const Law& law : all_laws()) {
    if (law.kind() == LawKind::Laplace) continue;
    const double inf = std::numeric_limits<double>::infinity();
    const double info = integrate([&](double x) { return law.score(x) * law.score(x) * law.pdf(x); }, -inf, inf);
    EXPECT_NEAR(info, law.fisher_information(), 1e-8) << law.name();
  }
}

TEST(Laws, SamplingIsDeterministicAndPlausible) {
  const Law law = Law::normal();
  const auto a = law.sample(20000, 11);
  const auto b = law.sample(20000, 11);
  EXPECT_EQ(a, b);
  double s = 0.0, s2 = 0.0;
  for (double v : a) s += v, s2 += v * v;
  EXPECT_NEAR(s / a.size(), 0.0, 0.03);
  EXPECT_NEAR(s2 / a.size(), 1.0, 0.05);
}

TEST(Laws, FromName) {
  EXPECT_EQ(Law::from_name("cauchy").kind(), LawKind::Cauchy);
  EXPECT_EQ(Law::from_name("huber", 0.5, 2.0).kind(), LawKind::Huber);
  EXPECT_THROW(Law::from_name("student"), Error);
}
