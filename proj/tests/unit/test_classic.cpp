#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "qte/classic.hpp"
#include "qte/errors.hpp"
#include "qte/laws.hpp"
#include "qte/rng.hpp"

using namespace qte;

namespace {

double brute_force_hl(std::span<const double> t, std::span<const double> c) {
  std::vector<double> d;
  for (double a : t) {
    for (double b : c) d.push_back(a - b);
  }
  std::sort(d.begin(), d.end());
  const std::size_t n = d.size();
  return n % 2 == 1 ? d[n / 2] : (d[n / 2 - 1] + d[n / 2]) / 2.0;
}

}  // namespace

TEST(DiffMeans, HandComputed) {
  const TwoSampleView v({1.0, 3.0}, {4.0, 10.0});
  const Estimate e = diff_means(v);
  EXPECT_DOUBLE_EQ(e.tau_hat, 5.0);
  EXPECT_DOUBLE_EQ(*e.var_hat, 18.0 / 2 + 2.0 / 2);
}

TEST(HodgesLehmann, MatchesBruteForceOnRandomInstances) {
  Rng rng(2024);
  std::uniform_int_distribution<int> size(1, 100);
  std::uniform_int_distribution<int> coarse(-20, 20);
  std::normal_distribution<double> noise(0.0, 3.0);
  for (int inst = 0; inst < 200; ++inst) {
    const int n0 = size(rng);
    const int n1 = size(rng);
    // Every third instance uses integer data so ties are common.
    auto draw = [&] { return inst % 3 == 0 ? static_cast<double>(coarse(rng)) : noise(rng); };
    std::vector<double> c(n0), t(n1);
    for (double& v : c) v = draw();
    for (double& v : t) v = draw() + 0.7;
    const TwoSampleView view(c, t);
    ASSERT_EQ(hodges_lehmann_point(view), brute_force_hl(view.treated(), view.control())) << "instance " << inst;
  }
}

TEST(HodgesLehmann, KthDifferenceEnumeratesAllRanks) {
  const std::vector<double> t{-1.0, 0.5, 2.0, 2.0, 7.5};
  const std::vector<double> c{-3.0, 0.0, 0.0, 4.0};
  std::vector<double> d;
  for (double a : t) {
    for (double b : c) d.push_back(a - b);
  }
  std::sort(d.begin(), d.end());
  for (std::uint64_t k = 1; k <= d.size(); ++k) EXPECT_EQ(kth_pairwise_difference(t, c, k), d[k - 1]) << k;
  EXPECT_THROW(kth_pairwise_difference(t, c, 0), Error);
  EXPECT_THROW(kth_pairwise_difference(t, c, d.size() + 1), Error);
}

TEST(HodgesLehmann, ShiftAndScaleEquivariant) {
  const auto c = Law::cauchy().sample(300, 1);
  const auto t = Law::cauchy().sample(250, 2);
  const double base = hodges_lehmann_point(TwoSampleView(c, t));
  std::vector<double> t2(t), c2(c), t3(t);
  for (double& v : t2) v += 3.0;
  for (double& v : c2) v *= 2.5;
  for (double& v : t3) v *= 2.5;
  EXPECT_NEAR(hodges_lehmann_point(TwoSampleView(c, t2)), base + 3.0, 1e-12);
  EXPECT_NEAR(hodges_lehmann_point(TwoSampleView(c2, t3)), 2.5 * base, 1e-12);
}

TEST(HodgesLehmann, RankVarianceOnNormalArms) {
  // Asymptotic variance for the normal law: pi / (3 p (1-p) n).
  const auto c = Law::normal().sample(20000, 5);
  const auto t = Law::normal().sample(20000, 6);
  const TwoSampleView v(c, t);
  const DensityFit fit0 = fit_adaptive_density(v.control());
  const double expected = M_PI / (3.0 * 0.25 * 40000.0);
  EXPECT_NEAR(hodges_lehmann_rank_variance(v, fit0) / expected, 1.0, 0.05);
}

TEST(DiffMedians, VarianceFromDensityAtMedians) {
  const auto c = Law::normal().sample(20000, 8);
  const auto t = Law::normal().sample(20000, 9);
  const TwoSampleView v(c, t);
  const DensityFit f0 = fit_adaptive_density(v.control());
  const DensityFit f1 = fit_adaptive_density(v.treated());
  const Estimate e = diff_medians(v, f0, f1);
  EXPECT_DOUBLE_EQ(e.tau_hat, empirical_quantile(v.treated(), 0.5) - empirical_quantile(v.control(), 0.5));
  // pi / 2 per unit for each arm.
  EXPECT_NEAR(*e.var_hat / (M_PI / 2.0 * (2.0 / 20000.0)), 1.0, 0.08);
}

TEST(HodgesLehmann, BootstrapVarianceIsDeterministic) {
  const auto c = Law::laplace().sample(400, 10);
  const auto t = Law::laplace().sample(400, 11);
  const TwoSampleView v(c, t);
  HlOptions o;
  o.bootstrap = BootstrapConfig{200, 60, 99};
  const Estimate a = hodges_lehmann(v, o);
  const Estimate b = hodges_lehmann(v, o);
  ASSERT_TRUE(a.var_hat.has_value());
  EXPECT_EQ(*a.var_hat, *b.var_hat);
  EXPECT_GT(*a.var_hat, 0.0);
}
