#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qte/sample.hpp"

namespace qte {

enum class TrimMode { Symmetric, Asymmetric, RightOnly };

/// Left/right trim fractions. Both lie in [0, 1) with alpha + beta < 1.
struct TrimSpec {
  double alpha = 0.0;
  double beta = 0.0;
  TrimMode mode = TrimMode::Asymmetric;
};

void validate(const TrimSpec& spec);

/// How a sorted arm of size m splits under a trim spec on the grid
/// u_i = i / (m + 1): `left` points with u_i <= alpha, `right` points with
/// u_i > 1 - beta, and the rest interior.
struct ArmTrim {
  std::size_t m = 0;
  std::size_t left = 0;
  std::size_t right = 0;

  std::size_t interior() const noexcept { return m - left - right; }
};

ArmTrim arm_trim(std::size_t m, const TrimSpec& spec);

/// Mean of the interior order statistics; with an empty interior, the
/// quantile at the middle of (alpha, 1 - beta].
double trimmed_mean(std::span<const double> sorted_arm, const TrimSpec& spec);
/// Mean after clamping tail points to the nearest interior order statistic.
double winsorized_mean(std::span<const double> sorted_arm, const TrimSpec& spec);

/// Plug-in asymptotic variance of the (alpha, beta)-trimmed mean: the mean
/// square of its influence function over the arm's order statistics.
double sigma2_hat(std::span<const double> sorted_arm, const TrimSpec& spec);
/// Plug-in asymptotic variance of the winsorized mean.
double sigma2_wins_hat(std::span<const double> sorted_arm, const TrimSpec& spec);

Estimate trimmed_tau(const TwoSampleView& view, const TrimSpec& spec);
Estimate winsorized_tau(const TwoSampleView& view, const TrimSpec& spec);

enum class TrimEstimator { Trim, Wins };

struct AdaptTrimOptions {
  double alpha0 = 0.0;
  double alpha1 = 0.495;
  TrimMode mode = TrimMode::Asymmetric;
  TrimEstimator estimator = TrimEstimator::Trim;
};

/// Grid search of (alpha, beta) minimizing the estimated asymptotic variance
/// p^-1 s1^2 + (1-p)^-1 s0^2, then one refinement pass around the coarse
/// argmin. Diagnostics carry alpha_hat, beta_hat and the coarse objective.
Estimate adapt_trim(const TwoSampleView& view, const AdaptTrimOptions& options = {});

/// O(1) per-(alpha, beta) evaluation of sigma2_hat / sigma2_wins_hat over a
/// fixed sorted arm, backed by prefix sums.
class TrimVarianceTable {
 public:
  explicit TrimVarianceTable(std::span<const double> sorted_arm);

  double trimmed(const TrimSpec& spec) const;
  double winsorized(const TrimSpec& spec) const;

 private:
  struct Moments {
    double s1 = 0.0;  // sum of centered values over [a, b)
    double s2 = 0.0;
  };
  Moments range(std::size_t a, std::size_t b) const;
  double at(std::size_t i) const { return x_[i] - center_; }
  double quantile_spacing(double level) const;

  std::span<const double> x_;
  double center_ = 0.0;
  std::vector<double> p1_;
  std::vector<double> p2_;
};

}  // namespace qte
