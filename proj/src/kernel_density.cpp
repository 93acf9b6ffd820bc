#include "qte/kernel_density.hpp"

#include <algorithm>
#include <cmath>

#include "kde_common.hpp"
#include "qte/errors.hpp"
#include "qte/sample.hpp"

namespace qte {

namespace detail {

std::vector<double> prepare_density_data(std::span<const double> data, const DensityConfig& config) {
  if (data.size() < config.min_points) {
    fail(ErrorKind::TooFewPoints, "density fit needs at least " + std::to_string(config.min_points) +
                                      " points, got " + std::to_string(data.size()));
  }
  std::vector<double> sorted(data.begin(), data.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) fail(ErrorKind::NonFinite, "density data contains NaN or infinity");
  }
  std::sort(sorted.begin(), sorted.end());
  return sorted;
}

Bandwidths rule_of_thumb(std::span<const double> sorted) {
  Bandwidths bw;
  bw.sigma = robust_sigma(sorted);
  const double m = static_cast<double>(sorted.size());
  bw.h = triweight::kBandwidth0 * bw.sigma * std::pow(m, -1.0 / 5.0);
  bw.h1 = triweight::kBandwidth1 * bw.sigma * std::pow(m, -1.0 / 7.0);
  bw.h2 = triweight::kBandwidth2 * bw.sigma * std::pow(m, -1.0 / 9.0);
  return bw;
}

double local_factors(std::span<const double> pilot_at_data, double alpha, std::vector<double>& lambda) {
  double log_sum = 0.0;
  for (double v : pilot_at_data) log_sum += std::log(v);
  const double g = std::exp(log_sum / static_cast<double>(pilot_at_data.size()));
  lambda.resize(pilot_at_data.size());
  for (std::size_t i = 0; i < pilot_at_data.size(); ++i) {
    lambda[i] = std::pow(pilot_at_data[i] / g, -alpha);
  }
  return g;
}

}  // namespace detail

namespace {

// Window [lo, hi) of sorted data that can lie within `radius` of x. Slightly
// widened so every nonzero kernel term is inside; terms outside the true
// support evaluate to exactly zero, so sums match the brute-force reference.
std::pair<std::size_t, std::size_t> window(std::span<const double> sorted, double x, double radius) {
  const double r = radius * (1.0 + 1e-9);
  const auto lo = std::lower_bound(sorted.begin(), sorted.end(), x - r);
  const auto hi = std::upper_bound(lo, sorted.end(), x + r);
  return {static_cast<std::size_t>(lo - sorted.begin()), static_cast<std::size_t>(hi - sorted.begin())};
}

}  // namespace

DensityFit::DensityFit(DensityEstimates est, double floor) : est_(std::move(est)), floor_(floor) {
  const std::size_t k = est_.grid.size();
  lpsi1_.resize(k);
  lpsi2_.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double f = std::max(est_.fhat[i], floor_);
    const double f1 = est_.fhat1[i];
    const double f2 = est_.fhat2[i];
    lpsi1_[i] = f1 / f;
    lpsi2_[i] = (f * f2 - f1 * f1) / (f * f);
  }
  log_f_.assign(k, 0.0);
  for (std::size_t i = 1; i < k; ++i) {
    log_f_[i] = log_f_[i - 1] + 0.5 * (est_.grid[i] - est_.grid[i - 1]) * (lpsi1_[i - 1] + lpsi1_[i]);
  }
}

double DensityFit::interpolate(std::span<const double> values, double x) const {
  const auto& grid = est_.grid;
  if (x <= grid.front()) return values.front();
  if (x >= grid.back()) return values.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - grid.begin());
  const std::size_t i = j - 1;
  if (x == grid[i]) return values[i];
  const double t = (x - grid[i]) / (grid[j] - grid[i]);
  return (1.0 - t) * values[i] + t * values[j];
}

double DensityFit::lpsi(double x, int order) const {
  return interpolate(order == 1 ? std::span<const double>(lpsi1_) : std::span<const double>(lpsi2_), x);
}

double DensityFit::density(double x) const { return interpolate(est_.fhat, x); }

double DensityFit::log_density(double x) const {
  const auto& grid = est_.grid;
  if (x <= grid.front()) return (x - grid.front()) * lpsi1_.front();
  if (x >= grid.back()) return log_f_.back() + (x - grid.back()) * lpsi1_.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
  return log_f_[i] + 0.5 * (x - grid[i]) * (lpsi1_[i] + lpsi(x, 1));
}

double DensityFit::integral_f_squared() const {
  double s = 0.0;
  for (std::size_t i = 1; i < est_.grid.size(); ++i) {
    const double a = est_.fhat[i - 1];
    const double b = est_.fhat[i];
    s += 0.5 * (est_.grid[i] - est_.grid[i - 1]) * (a * a + b * b);
  }
  return s;
}

double DensityFit::integral_f() const {
  double s = 0.0;
  for (std::size_t i = 1; i < est_.grid.size(); ++i) {
    s += 0.5 * (est_.grid[i] - est_.grid[i - 1]) * (est_.fhat[i - 1] + est_.fhat[i]);
  }
  return s;
}

double robust_sigma(std::span<const double> data) {
  if (data.size() < 20) fail(ErrorKind::TooFewPoints, "robust scale needs at least 20 points");
  std::vector<double> sorted;
  std::span<const double> s = data;
  if (!std::is_sorted(data.begin(), data.end())) {
    sorted.assign(data.begin(), data.end());
    std::sort(sorted.begin(), sorted.end());
    s = sorted;
  }
  const double spread = empirical_quantile(s, 0.95) - empirical_quantile(s, 0.05);
  if (!(spread > 0.0)) fail(ErrorKind::DegenerateScale, "5% and 95% quantiles coincide");
  return spread / (2.0 * 1.6449);
}

std::vector<double> quantile_grid(std::span<const double> sorted) {
  std::vector<double> grid(kDensityGridSize);
  const std::size_t m = sorted.size();
  for (std::size_t k = 1; k <= kDensityGridSize; ++k) {
    grid[k - 1] = sorted[quantile_index(m, static_cast<double>(k) / 1000.0) - 1];
  }
  return grid;
}

DensityFit fit_adaptive_density(std::span<const double> data, const DensityConfig& config) {
  const std::vector<double> x = detail::prepare_density_data(data, config);
  const std::span<const double> xs(x);
  const std::size_t m = x.size();
  const detail::Bandwidths bw = detail::rule_of_thumb(xs);

  DensityEstimates est;
  est.grid = quantile_grid(xs);
  est.h = bw.h;
  est.h1 = bw.h1;
  est.h2 = bw.h2;
  est.sigma_hat = bw.sigma;

  // Pilot at the data points. Data are sorted, so each window is contiguous.
  std::vector<double> pilot(m);
  const auto mi = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < mi; ++i) {
    const auto [lo, hi] = window(xs, x[i], bw.h);
    pilot[i] = detail::pilot_sum(x[i], xs, bw.h, lo, hi);
  }
  est.g = detail::local_factors(pilot, config.alpha, est.lambda);

  const double lambda_max = *std::max_element(est.lambda.begin(), est.lambda.end());
  const double radius = std::max({bw.h, bw.h1, bw.h2}) * lambda_max;
  const std::size_t k = est.grid.size();
  est.fhat.resize(k);
  est.fhat1.resize(k);
  est.fhat2.resize(k);
  const auto ki = static_cast<std::ptrdiff_t>(k);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t j = 0; j < ki; ++j) {
    const auto [lo, hi] = window(xs, est.grid[j], radius);
    const auto s = detail::adaptive_sums(est.grid[j], xs, est.lambda, bw, lo, hi);
    est.fhat[j] = s.f;
    est.fhat1[j] = s.f1;
    est.fhat2[j] = s.f2;
  }
  return DensityFit(std::move(est), config.floor);
}

double eval_lpsi(const DensityFit& fit, double x, int order) { return fit.lpsi(x, order); }

}  // namespace qte
