#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qte {

// Triweight kernel and its first two derivatives, zero outside [-1, 1].
namespace triweight {
inline constexpr double kNorm = 35.0 / 32.0;
// Rule-of-thumb bandwidth constants for f, f' and f''.
inline constexpr double kBandwidth0 = 3.15;
inline constexpr double kBandwidth1 = 2.83;
inline constexpr double kBandwidth2 = 2.70;

inline double k0(double u) noexcept {
  if (u < -1.0 || u > 1.0) return 0.0;
  const double a = 1.0 - u * u;
  return kNorm * a * a * a;
}
inline double k1(double u) noexcept {
  if (u < -1.0 || u > 1.0) return 0.0;
  const double a = 1.0 - u * u;
  return 3.0 * kNorm * a * a * (-2.0 * u);
}
inline double k2(double u) noexcept {
  if (u < -1.0 || u > 1.0) return 0.0;
  return 2.0 * 3.0 * kNorm * (1.0 - u * u) * (5.0 * u * u - 1.0);
}
}  // namespace triweight

inline constexpr std::size_t kDensityGridSize = 999;

struct DensityConfig {
  /// Sensitivity exponent of the local bandwidth factors.
  double alpha = 0.5;
  /// Minimum sample size accepted by fit_adaptive_density.
  std::size_t min_points = 100;
  /// Density values below this are clamped before forming log-derivatives.
  double floor = 1e-30;
};

/// Raw kernel sums produced by a fitting kernel (parallel or reference).
struct DensityEstimates {
  std::vector<double> grid;
  std::vector<double> fhat;
  std::vector<double> fhat1;
  std::vector<double> fhat2;
  std::vector<double> lambda;
  double h = 0.0;
  double h1 = 0.0;
  double h2 = 0.0;
  double g = 0.0;
  double sigma_hat = 0.0;
};

/// Adaptive triweight estimate of f, f', f'' on the 999-point quantile grid
/// plus the derived log-density derivatives.
class DensityFit {
 public:
  DensityFit(DensityEstimates est, double floor);

  std::span<const double> grid() const noexcept { return est_.grid; }
  std::span<const double> fhat() const noexcept { return est_.fhat; }
  std::span<const double> fhat1() const noexcept { return est_.fhat1; }
  std::span<const double> fhat2() const noexcept { return est_.fhat2; }
  std::span<const double> lpsi1() const noexcept { return lpsi1_; }
  std::span<const double> lpsi2() const noexcept { return lpsi2_; }
  std::span<const double> lambda() const noexcept { return est_.lambda; }
  double h() const noexcept { return est_.h; }
  double h1() const noexcept { return est_.h1; }
  double h2() const noexcept { return est_.h2; }
  double g() const noexcept { return est_.g; }
  double sigma_hat() const noexcept { return est_.sigma_hat; }
  double floor() const noexcept { return floor_; }

  /// (log f)' or (log f)'' at x: linear interpolation between grid points,
  /// nearest grid value outside.
  double lpsi(double x, int order) const;
  /// f-hat at x by the same interpolation rule.
  double density(double x) const;
  /// Antiderivative of the interpolated (log f)', zero at the first grid point.
  /// Differences of this function are consistent with lpsi(x, 1).
  double log_density(double x) const;
  /// Trapezoid integral of f-hat squared over the grid.
  double integral_f_squared() const;
  /// Trapezoid integral of f-hat over the grid.
  double integral_f() const;

 private:
  double interpolate(std::span<const double> values, double x) const;

  DensityEstimates est_;
  double floor_;
  std::vector<double> lpsi1_;
  std::vector<double> lpsi2_;
  std::vector<double> log_f_;
};

/// (q_0.95 - q_0.05) / (2 * 1.6449) with order-statistic quantiles.
double robust_sigma(std::span<const double> data);

/// Grid points X_(ceil(m k / 1000)), k = 1..999, of sorted data.
std::vector<double> quantile_grid(std::span<const double> sorted);

/// Two-stage adaptive kernel fit. OpenMP-parallel over evaluation points;
/// results do not depend on the thread count.
DensityFit fit_adaptive_density(std::span<const double> data, const DensityConfig& config = {});

double eval_lpsi(const DensityFit& fit, double x, int order);

}  // namespace qte
