#include "qte/extended_huber.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <numbers>

#include "qte/errors.hpp"
#include "qte/rng.hpp"

namespace qte {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) fail(ErrorKind::BadQuantile, "normal quantile level must lie in (0,1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

namespace {
constexpr double kSqrt2Pi = 2.5066282746310002;
}

double extended_huber_c(double k1, double k2) {
  return std::log(std::exp(-0.5 * k1 * k1) / k1 + std::exp(-0.5 * k2 * k2) / k2 +
                  kSqrt2Pi * (normal_cdf(k2) - normal_cdf(-k1)));
}

ExtendedHuber::ExtendedHuber(double k1, double k2, double mu, double sigma)
    : k1_(k1), k2_(k2), mu_(mu), sigma_(sigma) {
  if (!(k1 > 0.0 && k2 > 0.0 && sigma > 0.0) || !std::isfinite(k1) || !std::isfinite(k2) ||
      !std::isfinite(mu) || !std::isfinite(sigma)) {
    fail(ErrorKind::BadParams, "extended Huber needs finite k1, k2, sigma > 0");
  }
  c_ = extended_huber_c(k1, k2);
  alpha_ = std::exp(-0.5 * k1 * k1 - c_) / k1;
  beta_ = std::exp(-0.5 * k2 * k2 - c_) / k2;
}

double ExtendedHuber::log_pdf(double x) const {
  const double z = (x - mu_) / sigma_;
  double lf;
  if (z < -k1_) {
    lf = k1_ * z + 0.5 * k1_ * k1_ - c_;
  } else if (z > k2_) {
    lf = -k2_ * z + 0.5 * k2_ * k2_ - c_;
  } else {
    lf = -0.5 * z * z - c_;
  }
  return lf - std::log(sigma_);
}

double ExtendedHuber::pdf(double x) const { return std::exp(log_pdf(x)); }

double ExtendedHuber::cdf(double x) const {
  const double z = (x - mu_) / sigma_;
  if (z < -k1_) return std::exp(k1_ * z + 0.5 * k1_ * k1_ - c_) / k1_;
  if (z > k2_) return 1.0 - std::exp(-k2_ * z + 0.5 * k2_ * k2_ - c_) / k2_;
  return alpha_ + std::exp(-c_) * kSqrt2Pi * (normal_cdf(z) - normal_cdf(-k1_));
}

double ExtendedHuber::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) fail(ErrorKind::BadQuantile, "quantile level must lie in (0,1)");
  double z;
  if (u <= alpha_) {
    z = (std::log(u * k1_) + c_ - 0.5 * k1_ * k1_) / k1_;
  } else if (u >= 1.0 - beta_) {
    z = -(std::log((1.0 - u) * k2_) + c_ - 0.5 * k2_ * k2_) / k2_;
  } else {
    const double target = normal_cdf(-k1_) + (u - alpha_) * std::exp(c_) / kSqrt2Pi;
    z = normal_quantile(std::clamp(target, 1e-300, 1.0 - 1e-16));
    z = std::clamp(z, -k1_, k2_);
  }
  return mu_ + sigma_ * z;
}

double ExtendedHuber::score(double x) const {
  const double z = (x - mu_) / sigma_;
  if (z < -k1_) return k1_ / sigma_;
  if (z > k2_) return -k2_ / sigma_;
  return -z / sigma_;
}

double ExtendedHuber::score_derivative(double x) const {
  const double z = (x - mu_) / sigma_;
  if (z < -k1_ || z > k2_) return 0.0;
  return -1.0 / (sigma_ * sigma_);
}

std::vector<double> ExtendedHuber::sample(std::size_t n, std::uint64_t seed) const {
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = quantile(open_uniform(rng));
  return out;
}

}  // namespace qte
