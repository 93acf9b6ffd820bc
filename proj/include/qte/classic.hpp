#pragma once

#include <cstdint>
#include <span>

#include "qte/inference.hpp"
#include "qte/kernel_density.hpp"
#include "qte/sample.hpp"

namespace qte {

/// Difference in arm means with the unbiased two-sample variance.
Estimate diff_means(const TwoSampleView& view);

/// Difference of arm medians (ceil(m/2)-th order statistics). Variance from
/// the median influence function with f evaluated by the per-arm fits; pass
/// the control fit twice to share it under the shift model.
Estimate diff_medians(const TwoSampleView& view, const DensityFit& fit0, const DensityFit& fit1);

/// k-th smallest (1-based) of the n1*n0 differences t - c, selected without
/// materializing all pairs.
double kth_pairwise_difference(std::span<const double> treated, std::span<const double> control,
                               std::uint64_t k);

/// Median of all pairwise treated-control differences; even counts average
/// the two central values.
double hodges_lehmann_point(const TwoSampleView& view);

enum class HlVariance { Bootstrap, RankPlugin, None };

struct HlOptions {
  HlVariance variance = HlVariance::Bootstrap;
  BootstrapConfig bootstrap{};
  DensityConfig density{};
};

/// 1 / (12 p (1-p) n (int f^2)^2) with f fitted on the control arm.
double hodges_lehmann_rank_variance(const TwoSampleView& view, const DensityFit& fit0);

Estimate hodges_lehmann(const TwoSampleView& view, const HlOptions& options = {});

}  // namespace qte
