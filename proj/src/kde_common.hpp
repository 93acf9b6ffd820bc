#pragma once

// Pieces shared by the parallel kernels and the serial reference. The inner
// sums are identical; only the index ranges and the threading differ.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "qte/kernel_density.hpp"

namespace qte::detail {

struct Bandwidths {
  double sigma = 0.0;
  double h = 0.0;
  double h1 = 0.0;
  double h2 = 0.0;
};

/// Validates size and returns sorted data.
std::vector<double> prepare_density_data(std::span<const double> data, const DensityConfig& config);

Bandwidths rule_of_thumb(std::span<const double> sorted);

/// Fixed-bandwidth pilot sum over data[lo, hi).
inline double pilot_sum(double x, std::span<const double> data, double h, std::size_t lo,
                        std::size_t hi) noexcept {
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += triweight::k0((x - data[i]) / h);
  return s / (static_cast<double>(data.size()) * h);
}

struct PointSums {
  double f = 0.0;
  double f1 = 0.0;
  double f2 = 0.0;
};

/// Adaptive sums for f, f', f'' over data[lo, hi).
inline PointSums adaptive_sums(double x, std::span<const double> data, std::span<const double> lambda,
                               const Bandwidths& bw, std::size_t lo, std::size_t hi) noexcept {
  PointSums s;
  for (std::size_t i = lo; i < hi; ++i) {
    const double d = x - data[i];
    const double b0 = bw.h * lambda[i];
    const double b1 = bw.h1 * lambda[i];
    const double b2 = bw.h2 * lambda[i];
    s.f += triweight::k0(d / b0) / b0;
    s.f1 += triweight::k1(d / b1) / (b1 * b1);
    s.f2 += triweight::k2(d / b2) / (b2 * b2 * b2);
  }
  const double m = static_cast<double>(data.size());
  s.f /= m;
  s.f1 /= m;
  s.f2 /= m;
  return s;
}

/// lambda_i = (pilot_i / g)^(-alpha), g the geometric mean of the pilot values.
double local_factors(std::span<const double> pilot_at_data, double alpha, std::vector<double>& lambda);

}  // namespace qte::detail
