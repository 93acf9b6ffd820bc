#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qte/kernel_density.hpp"
#include "qte/laws.hpp"
#include "qte/sample.hpp"

namespace qte {

/// I-hat = -(1/n0) sum lpsi2(Y0_i). Throws DegenerateInfo when I-hat <= 0.
double shift_information(const DensityFit& fit0, std::span<const double> control);

/// 1 / (p (1-p) I-hat n): variance of the efficient shift estimators.
double shift_variance(const DensityFit& fit0, std::span<const double> control, double p, std::size_t n);

struct WaqWeights {
  std::vector<double> u_grid;
  std::vector<double> w;
  std::vector<bool> truncated;
  /// Untruncated weights (log-density second derivative at the quantiles).
  std::vector<double> w_tilde;
  double threshold = 0.0;
};

/// Efficient WAQ weights on u_i = i/(n0+1) from a control-arm fit. Weights
/// whose normalized size relative to the local density exceeds
/// log(log n)/log(n) n^(1/4) are zeroed; survivors sum to one.
/// Throws AllTruncated.
WaqWeights waq_weights(const DensityFit& fit0, const TwoSampleView& view);

/// Same recipe with the fit, quantiles and spacing-based densities taken from
/// an estimation sample and the grid sized for an evaluation control arm of
/// n0_eval points.
WaqWeights waq_weights_cross(const DensityFit& fit0, const TwoSampleView& estimation, std::size_t n0_eval,
                             std::size_t n_total);

/// sum_i w(u_i) (Y1_(ceil(n1 u_i)) - Y0_(i)). The grid must have n0 points.
double waq_from_weights(const TwoSampleView& view, std::span<const double> w);

struct ShiftOptions {
  bool split = false;
  std::uint64_t seed = 0;
  DensityConfig density{};
};

Estimate waq_estimate(const TwoSampleView& view, const ShiftOptions& options = {});

enum class EifMode { Root, OneStep };

struct EifOptions {
  bool split = false;
  EifMode mode = EifMode::Root;
  std::uint64_t seed = 0;
  /// Starting value; defaults to the difference in medians.
  std::optional<double> init;
  DensityConfig density{};
};

/// (1/n1) sum lpsi1(Y1 - tau) - (1/n0) sum lpsi1(Y0).
double eif_score(const DensityFit& fit0, const TwoSampleView& view, double tau);

Estimate eif_estimate(const TwoSampleView& view, const EifOptions& options = {});

/// Root or one-step EIF estimate given an already fitted control density.
Estimate eif_estimate_with_fit(const TwoSampleView& view, const DensityFit& fit0, EifMode mode,
                               double init);

/// WAQ estimate given an already fitted control density (full sample).
Estimate waq_estimate_with_fit(const TwoSampleView& view, const DensityFit& fit0);

struct OracleWeight {
  double weight = 0.0;
  /// Set for laws whose efficient weight is a point mass at 1/2.
  bool point_mass_at_half = false;
};

/// Closed-form population efficient weight at u.
OracleWeight optimal_weight_oracle(const Law& law, double u);

/// (1/I) (-(f'/f)')(F^-1(u)) evaluated from the law's score derivative.
double efficient_weight_from_score(const Law& law, double u);

/// Random halves of each arm; the first half takes the extra unit.
std::pair<TwoSampleView, TwoSampleView> split_halves(const TwoSampleView& view, std::uint64_t seed);

}  // namespace qte
