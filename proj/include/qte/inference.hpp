#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>

#include "qte/sample.hpp"

namespace qte {

enum class CiSource { Analytic, Bootstrap };

std::string_view ci_source_name(CiSource s) noexcept;

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.95;
  CiSource source = CiSource::Analytic;

  double length() const noexcept { return hi - lo; }
  bool covers(double value) const noexcept { return lo <= value && value <= hi; }
};

/// tau_hat -/+ z_{(1+level)/2} sqrt(var_hat). Throws MissingVariance.
ConfidenceInterval normal_ci(const Estimate& est, double level = 0.95,
                             CiSource source = CiSource::Analytic);

struct BootstrapConfig {
  /// Resample size across both arms.
  std::size_t m = 2000;
  std::size_t replicates = 200;
  std::uint64_t seed = 0;
};

/// An estimator run on a resample; the seed is the replicate's substream.
using ResampleEstimator = std::function<double(const TwoSampleView&, std::uint64_t seed)>;

/// m-out-of-n bootstrap: resample round(m p) treated and m - round(m p)
/// control units with replacement within arm, and return (m / n) times the
/// sample variance of the replicate estimates. Replicates run in parallel
/// with per-replicate substreams, so the result does not depend on the
/// thread count. Throws ResampleFailure when more than 10% of replicates fail.
double m_of_n_bootstrap_var(const TwoSampleView& view, const ResampleEstimator& estimator,
                            const BootstrapConfig& config);

}  // namespace qte
