#pragma once

#include <cstdint>
#include <vector>

namespace qte {

/// Standard normal cdf and quantile.
double normal_cdf(double x);
double normal_quantile(double u);

/// Asymmetric Huber law: Gaussian between -k1 and k2 (standardized units),
/// exponential tails whose log-slopes match the Gaussian part at the joins,
/// so the score f'/f is continuous. Symmetric iff k1 == k2.
class ExtendedHuber {
 public:
  /// Throws BadParams unless k1, k2, sigma > 0.
  ExtendedHuber(double k1, double k2, double mu = 0.0, double sigma = 1.0);

  double k1() const noexcept { return k1_; }
  double k2() const noexcept { return k2_; }
  double mu() const noexcept { return mu_; }
  double sigma() const noexcept { return sigma_; }
  /// Log normalizing constant of the standardized density.
  double c() const noexcept { return c_; }
  /// F(-k1) and 1 - F(k2) in standardized units: the optimal trim fractions.
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }

  double log_pdf(double x) const;
  double pdf(double x) const;
  double cdf(double x) const;
  double quantile(double u) const;
  /// d/dx log f.
  double score(double x) const;
  /// d^2/dx^2 log f.
  double score_derivative(double x) const;
  std::vector<double> sample(std::size_t n, std::uint64_t seed) const;

 private:
  double k1_;
  double k2_;
  double mu_;
  double sigma_;
  double c_;
  double alpha_;
  double beta_;
};

/// Normalizing constant c(k1, k2).
double extended_huber_c(double k1, double k2);

}  // namespace qte
