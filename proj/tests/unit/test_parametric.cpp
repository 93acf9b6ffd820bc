#include <gtest/gtest.h>

#include <cmath>

#include "qte/classic.hpp"
#include "qte/errors.hpp"
#include "qte/laws.hpp"
#include "qte/parametric.hpp"
#include "qte/shift.hpp"

using namespace qte;

namespace {

Theta scalar(double v) { return Theta::Constant(1, v); }

std::vector<double> positive_sample(std::size_t n, std::uint64_t seed) {
  auto x = Law::normal().sample(n, seed);
  for (double& v : x) v = std::exp(0.5 * v);
  return x;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::BadConfig;
}

}  // namespace

TEST(QuantileMatch, ClosedFormExamples) {
  const std::vector<double> half{0.5};
  const TwoSampleView v({1.0, 2.0, 3.0}, {3.0, 4.0, 5.0});
  EXPECT_DOUBLE_EQ(quantile_match_init(v, MultiplicativeModel{}, half)[0], 2.0);
  const TwoSampleView w(Law::laplace().sample(301, 1), Law::laplace().sample(200, 2));
  const DensityFit f0 = fit_adaptive_density(w.control());
  const DensityFit f1 = fit_adaptive_density(w.treated());
  EXPECT_EQ(quantile_match_init(w, AdditiveModel{}, half)[0], diff_medians(w, f0, f1).tau_hat);
}

TEST(QuantileMatch, ExactTransformsRecoverTheta) {
  const auto c = positive_sample(500, 3);
  std::vector<double> add(c), mul(c), aff(c);
  for (double& y : add) y += 0.75;
  for (double& y : mul) y *= 1.6;
  for (double& y : aff) y = -1.0 + 2.5 * y;
  const std::vector<double> half{0.5};
  EXPECT_NEAR(quantile_match_init(TwoSampleView(c, add), AdditiveModel{}, half)[0], 0.75, 1e-12);
  EXPECT_NEAR(quantile_match_init(TwoSampleView(c, mul), MultiplicativeModel{}, half)[0], 1.6, 1e-12);
  const std::vector<double> two{0.25, 0.75};
  const Theta t = quantile_match_init(TwoSampleView(c, aff), AffineModel{}, two);
  EXPECT_NEAR(t[0], -1.0, 1e-9);
  EXPECT_NEAR(t[1], 2.5, 1e-9);
}

TEST(QuantileMatch, Errors) {
  const TwoSampleView v({1.0, 2.0, 3.0}, {-3.0, -2.0, -1.0});
  const std::vector<double> half{0.5};
  EXPECT_EQ(kind_of([&] { quantile_match_init(v, MultiplicativeModel{}, half); }), ErrorKind::NoSolution);
  const std::vector<double> bad{1.5};
  EXPECT_EQ(kind_of([&] { quantile_match_init(v, AdditiveModel{}, bad); }), ErrorKind::BadQuantile);
  const std::vector<double> two{0.3, 0.6};
  EXPECT_THROW(quantile_match_init(v, AdditiveModel{}, two), Error);
}

TEST(TreatmentModels, RoundTripAndMonotone) {
  const std::vector<double> grid{-3.0, -0.5, 0.0, 0.1, 2.0, 50.0};
  const AdditiveModel add;
  const MultiplicativeModel mul;
  const AffineModel aff;
  for (const auto& [model, theta] : {std::pair<const TreatmentModel*, Theta>{&add, scalar(-2.0)},
                                     {&mul, scalar(0.3)}, {&aff, Theta{{1.5, 0.2}}}}) {
    EXPECT_NO_THROW(validate_model(*model, theta, grid));
    for (double y : grid) {
      EXPECT_NEAR(model->h(model->h_inv(y, theta), theta), y, 1e-9 * std::max(1.0, std::abs(y)));
    }
  }
  EXPECT_EQ(kind_of([&] { validate_model(aff, Theta{{0.0, -1.0}}, grid); }), ErrorKind::BadParams);
}

TEST(ScoreG, AdditiveReducesToShiftScore) {
  const DensityFit fit0 = fit_adaptive_density(Law::normal().sample(2000, 4));
  for (double y : {-1.0, 0.2, 1.7}) {
    EXPECT_NEAR(score_g(fit0, AdditiveModel{}, scalar(0.4), y)[0], -fit0.lpsi(y - 0.4, 1), 1e-15);
  }
}

TEST(ScoreG, MultiplicativeMatchesHandDerivation) {
  const DensityFit fit0 = fit_adaptive_density(Law::normal().sample(2000, 5));
  const double theta = 1.3;
  for (double y : {-1.0, 0.2, 1.7}) {
    const double z = y / theta;
    const double expected = -(1.0 / theta) * (1.0 + z * fit0.lpsi(z, 1));
    EXPECT_NEAR(score_g(fit0, MultiplicativeModel{}, scalar(theta), y)[0], expected, 1e-12);
  }
}

TEST(ScoreG, AnalyticMatchesFiniteDifferenceOnGrid) {
  const DensityFit fit0 = fit_adaptive_density(Law::normal().sample(5000, 6));
  const MultiplicativeModel mul;
  const AffineModel aff;
  int checked = 0;
  for (std::size_t k = 5; k < fit0.grid().size() - 5; k += 10) {
    const double x0 = fit0.grid()[k];
    if (fit0.fhat()[k] <= 10.0 * fit0.floor()) continue;
    // Evaluate at y = h(x0) so h_inv lands on a grid point of the fit.
    const Theta tm = scalar(1.7);
    const double ym = mul.h(x0, tm);
    const double a = score_g(fit0, mul, tm, ym, ScoreMethod::Analytic)[0];
    const double f = score_g(fit0, mul, tm, ym, ScoreMethod::FiniteDifference)[0];
    EXPECT_LT(std::abs(a - f), 1e-4 * std::max(std::abs(a), 1e-3)) << x0;
    const Theta ta{{0.3, 0.8}};
    const Eigen::VectorXd ga = score_g(fit0, aff, ta, aff.h(x0, ta), ScoreMethod::Analytic);
    const Eigen::VectorXd gf = score_g(fit0, aff, ta, aff.h(x0, ta), ScoreMethod::FiniteDifference);
    EXPECT_LT((ga - gf).norm(), 1e-4 * std::max(ga.norm(), 1e-3)) << x0;
    ++checked;
  }
  EXPECT_GT(checked, 90);
}

TEST(OneStep, AdditiveReproducesShiftOneStep) {
  const TwoSampleView v(Law::normal().sample(3000, 7), Law::normal().sample(2500, 8));
  const DensityFit fit0 = fit_adaptive_density(v.control());
  const double init = quantile_match_init(v, AdditiveModel{}, std::vector<double>{0.5})[0];
  const ParametricEstimate p = one_step_theta_with_fit(v, fit0, AdditiveModel{}, scalar(init), InformationKind::Observed);
  const Estimate s = eif_estimate_with_fit(v, fit0, EifMode::OneStep, init);
  EXPECT_NEAR(p.estimate.tau_hat, s.tau_hat, 1e-12);
  EXPECT_NEAR(*p.estimate.var_hat, *s.var_hat, 1e-12 * *s.var_hat);
  EXPECT_NEAR(p.information(0, 0), shift_information(fit0, v.control()), 1e-12);
  EXPECT_NEAR(in_sample_ate(v, AdditiveModel{}, p.theta), p.theta[0], 1e-12);
  // The default outer-product information agrees to sampling accuracy.
  const ParametricEstimate q = one_step_theta_with_fit(v, fit0, AdditiveModel{}, scalar(init));
  EXPECT_NEAR(q.information(0, 0) / p.information(0, 0), 1.0, 0.2);
}

TEST(OneStep, MultiplicativeMovesTowardTruth) {
  const auto c = positive_sample(4000, 9);
  std::vector<double> t(c);
  for (double& y : t) y *= 2.0;
  const TwoSampleView v(c, t);
  for (double delta : {-0.05, 0.05}) {
    const ParametricEstimate p = one_step_theta(v, scalar(2.0 + delta), MultiplicativeModel{});
    EXPECT_LT(std::abs(p.theta[0] - 2.0), std::abs(delta) + 1e-6) << delta;
    EXPECT_GT(*p.estimate.var_hat, 0.0);
  }
}

TEST(OneStep, InformationInvariances) {
  const auto c = positive_sample(3000, 10);
  std::vector<double> c_shift(c), c_scaled(c);
  for (double& y : c_shift) y += 5.0;
  for (double& y : c_scaled) y *= 3.0;
  const auto info = [](std::span<const double> x, const TreatmentModel& m, double theta) {
    return parametric_information(fit_adaptive_density(x), m, scalar(theta), x, InformationKind::OuterProduct)(0, 0);
  };
  EXPECT_NEAR(info(c_shift, AdditiveModel{}, 0.3), info(c, AdditiveModel{}, 0.3), 1e-8);
  EXPECT_NEAR(info(c_scaled, MultiplicativeModel{}, 1.4), info(c, MultiplicativeModel{}, 1.4), 1e-8);
}

TEST(Ate, HandExamples) {
  const TwoSampleView v({1.0}, {4.0});
  EXPECT_DOUBLE_EQ(in_sample_ate(v, MultiplicativeModel{}, scalar(2.0)), 1.5);
  EXPECT_DOUBLE_EQ(in_sample_ate(v, MultiplicativeModel{}, scalar(1.0)), 0.0);
  const std::vector<double> c{1.0, 3.0};
  EXPECT_DOUBLE_EQ(population_ate(c, MultiplicativeModel{}, scalar(2.0)), 2.0);
  EXPECT_DOUBLE_EQ(population_ate(c, MultiplicativeModel{}, scalar(1.0)), 0.0);
  EXPECT_DOUBLE_EQ(population_ate(c, AdditiveModel{}, scalar(0.7)), 0.7);
  const TwoSampleView w({-2.0, 5.0, 9.0}, {0.5, 11.0});
  EXPECT_NEAR(in_sample_ate(w, AdditiveModel{}, scalar(-1.25)), -1.25, 1e-15);
}

TEST(LevelEffect, NoEffectAndMedicalConstants) {
  const LevelEffect e = level_from_log(0.0, 38745.0, 34872.0, 0.0531, 2.0);
  EXPECT_EQ(e.tau, 0.0);
  const double mult = 0.9469 * 38745.0 + 0.0531 * 34872.0;
  EXPECT_NEAR(e.var, mult * mult * 2.0, 1e-9 * mult * mult);
  EXPECT_EQ(level_from_log(0.3, 38745.0, 34872.0, 0.0531, 0.0).var, 0.0);
}

TEST(LevelEffect, VarianceIsDeltaMethod) {
  const double tl = -0.12, mu0 = 10.0, mu1 = 8.5, p = 0.3, v = 0.004;
  const double eps = 1e-6;
  const double d = (level_from_log(tl + eps, mu0, mu1, p, v).tau - level_from_log(tl - eps, mu0, mu1, p, v).tau) / (2 * eps);
  const LevelEffect e = level_from_log(tl, mu0, mu1, p, v);
  EXPECT_NEAR(e.var, d * d * v, 1e-8 * e.var);
  EXPECT_NEAR(e.tau, (1 - p) * (std::exp(tl) - 1) * mu0 + p * (1 - std::exp(-tl)) * mu1, 1e-12);
  EXPECT_EQ(kind_of([] { level_from_log(0.1, 1.0, 1.0, 1.5, 1.0); }), ErrorKind::BadParams);
  EXPECT_EQ(kind_of([] { level_from_log(0.1, 1.0, 1.0, 0.5, -1.0); }), ErrorKind::BadParams);
}
