#include "qte/sample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qte/errors.hpp"

namespace qte {

namespace {

void check_finite(std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) fail(ErrorKind::NonFinite, "outcome is NaN or infinite");
  }
}

}  // namespace

TwoSampleView::TwoSampleView(std::vector<double> control, std::vector<double> treated)
    : control_(std::move(control)), treated_(std::move(treated)) {
  if (control_.empty()) fail(ErrorKind::EmptyArm, "control arm has no units");
  if (treated_.empty()) fail(ErrorKind::EmptyArm, "treated arm has no units");
  check_finite(control_);
  check_finite(treated_);
  std::stable_sort(control_.begin(), control_.end());
  std::stable_sort(treated_.begin(), treated_.end());
}

TwoSampleView TwoSampleView::swapped() const { return TwoSampleView(treated_, control_); }

std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::DiffMeans: return "means";
    case Method::DiffMedians: return "medians";
    case Method::HodgesLehmann: return "hl";
    case Method::Trimmed: return "trim";
    case Method::Winsorized: return "wins";
    case Method::Eif: return "eif";
    case Method::Waq: return "waq";
    case Method::Parametric: return "parametric";
  }
  return "unknown";
}

TwoSampleView split_sample(std::span<const Observation> pairs) {
  std::vector<double> control;
  std::vector<double> treated;
  for (const auto& obs : pairs) {
    if (obs.z != 0 && obs.z != 1) {
      fail(ErrorKind::BadIndicator, "treatment indicator must be 0 or 1, got " + std::to_string(obs.z));
    }
    if (!std::isfinite(obs.y)) fail(ErrorKind::NonFinite, "outcome is NaN or infinite");
    (obs.z == 1 ? treated : control).push_back(obs.y);
  }
  return TwoSampleView(std::move(control), std::move(treated));
}

std::size_t quantile_index(std::size_t m, double u) {
  if (!(u > 0.0 && u <= 1.0)) fail(ErrorKind::BadQuantile, "quantile level must lie in (0,1]");
  // m * u can land a few ulps above an integer (u = k / m); snap those back so
  // the index matches exact rational arithmetic.
  const double x = static_cast<double>(m) * u;
  const double r = std::round(x);
  const double k = std::abs(x - r) <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, x) ? r : std::ceil(x);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(k, 1.0)), 1, m);
}

double empirical_quantile(std::span<const double> sorted_arm, double u) {
  if (sorted_arm.empty()) fail(ErrorKind::EmptyArm, "quantile of empty arm");
  return sorted_arm[quantile_index(sorted_arm.size(), u) - 1];
}

std::vector<std::pair<double, double>> qte_curve(const TwoSampleView& view,
                                                 std::span<const double> grid) {
  std::vector<std::pair<double, double>> out;
  out.reserve(grid.size());
  for (double u : grid) {
    if (!(u > 0.0 && u < 1.0)) fail(ErrorKind::BadQuantile, "grid values must lie in (0,1)");
    out.emplace_back(u, empirical_quantile(view.treated(), u) - empirical_quantile(view.control(), u));
  }
  return out;
}

double mean(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double mu = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - mu) * (v - mu);
  return ss / static_cast<double>(x.size() - 1);
}

double median(std::vector<double> x) {
  const std::size_t m = x.size();
  auto mid = x.begin() + static_cast<std::ptrdiff_t>(m / 2);
  std::nth_element(x.begin(), mid, x.end());
  if (m % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(x.begin(), mid);
  return 0.5 * (lower + upper);
}

double mad_scale(std::span<const double> x) {
  std::vector<double> v(x.begin(), x.end());
  const double med = median(v);
  for (double& d : v) d = std::abs(d - med);
  return 1.4826 * median(std::move(v));
}

}  // namespace qte
