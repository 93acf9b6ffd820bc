#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qte {

/// One observation of a completely randomized experiment.
struct Observation {
  double y = 0.0;
  int z = 0;
};

/// Sorted treated/control outcomes. Immutable once built; every estimator
/// takes one of these.
class TwoSampleView {
 public:
  /// Sorts both arms. Throws EmptyArm / NonFinite.
  TwoSampleView(std::vector<double> control, std::vector<double> treated);

  std::span<const double> control() const noexcept { return control_; }
  std::span<const double> treated() const noexcept { return treated_; }
  std::size_t n0() const noexcept { return control_.size(); }
  std::size_t n1() const noexcept { return treated_.size(); }
  std::size_t n() const noexcept { return control_.size() + treated_.size(); }
  double p() const noexcept { return static_cast<double>(n1()) / static_cast<double>(n()); }

  /// Arms swapped (treated becomes control); estimators negate the result.
  TwoSampleView swapped() const;

 private:
  std::vector<double> control_;
  std::vector<double> treated_;
};

enum class Method {
  DiffMeans,
  DiffMedians,
  HodgesLehmann,
  Trimmed,
  Winsorized,
  Eif,
  Waq,
  Parametric,
};

std::string_view method_name(Method m) noexcept;

struct Estimate {
  double tau_hat = 0.0;
  std::optional<double> var_hat;
  Method method = Method::DiffMeans;
  std::map<std::string, double> diagnostics;
  std::map<std::string, std::vector<double>> series;
};

TwoSampleView split_sample(std::span<const Observation> pairs);

/// The ceil(m*u)-th order statistic of a sorted arm, index clamped to [1, m].
double empirical_quantile(std::span<const double> sorted_arm, double u);

/// 1-based order-statistic index used by empirical_quantile.
std::size_t quantile_index(std::size_t m, double u);

std::vector<std::pair<double, double>> qte_curve(const TwoSampleView& view,
                                                 std::span<const double> grid);

double mean(std::span<const double> x);
/// Unbiased sample variance; 0 for a single value.
double sample_variance(std::span<const double> x);
/// Conventional median of an unsorted or sorted sample (average of the
/// middle pair for even sizes).
double median(std::vector<double> x);
/// 1.4826 * median absolute deviation.
double mad_scale(std::span<const double> x);

}  // namespace qte
