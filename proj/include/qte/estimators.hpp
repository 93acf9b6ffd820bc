#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qte/inference.hpp"
#include "qte/kernel_density.hpp"
#include "qte/sample.hpp"
#include "qte/shift.hpp"
#include "qte/trimmed.hpp"

namespace qte {

// Settings shared by every estimator that can be selected by name.
struct EstimatorSettings {
  CiSource ci = CiSource::Analytic;
  double level = 0.95;
  BootstrapConfig bootstrap{};
  double trim_alpha0 = 0.0;
  double trim_alpha1 = 0.495;
  TrimMode trim_mode = TrimMode::Asymmetric;
  EifMode eif_mode = EifMode::Root;
  bool split = false;
  std::uint64_t seed = 0;
  DensityConfig density{};
};

// means, medians, hl, trim, wins, eif, waq
const std::vector<std::string>& estimator_names();
bool is_known_estimator(std::string_view name);

// Caches the per-arm density fits so several estimators on one sample share them.
class EstimationContext {
 public:
  EstimationContext(const TwoSampleView& view, DensityConfig density) : view_(view), density_(density) {}
  const TwoSampleView& view() const noexcept { return view_; }
  const DensityFit& control_fit();
  const DensityFit& treated_fit();

 private:
  const TwoSampleView& view_;
  DensityConfig density_;
  std::optional<DensityFit> fit0_;
  std::optional<DensityFit> fit1_;
};

struct EstimateWithCi {
  Estimate estimate;
  ConfidenceInterval ci;
};

// Point estimate only; variance work is skipped. Used inside resampling.
double point_estimate(std::string_view name, const TwoSampleView& view, const EstimatorSettings& settings);

// Estimate with the variance and interval requested in the settings.
EstimateWithCi run_estimator(std::string_view name, EstimationContext& context, const EstimatorSettings& settings);
EstimateWithCi run_estimator(std::string_view name, const TwoSampleView& view, const EstimatorSettings& settings);

}  // namespace qte
