#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "qte/laws.hpp"

namespace qte {

// A weight measure on (0,1): an optional density w(u) supported on (lo, hi)
// plus point masses.
struct WeightMeasure {
  std::function<double(double)> density;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::pair<double, double>> atoms;  // (u, mass)

  static WeightMeasure point_mass(double u, double mass = 1.0);
  // Constant density on (lo, hi) with total mass one.
  static WeightMeasure uniform(double lo = 0.0, double hi = 1.0);
  static WeightMeasure from_density(std::function<double(double)> w, double lo = 0.0, double hi = 1.0);
};

// Asymptotic variance of the L-statistic with weight measure W under the law:
// the double integral of (min(s,t) - st) / (q(s) q(t)) dW(s) dW(t), q = f(F^{-1}).
double sigma_f2_quadrature(const Law& law, const WeightMeasure& w);

// Influence function of the same L-statistic at x.
double psi_from_W(const Law& law, const WeightMeasure& w, double x);

// Inverse map: normalized cumulative weight at t from the derivative of psi.
double W_from_psi(const Law& law, const std::function<double(double)>& psi_prime, double t);

}  // namespace qte
