#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qte/extended_huber.hpp"

namespace qte {

enum class LawKind { Normal, Laplace, Cauchy, Huber };

/// Closed-form standardized outcome law used by the oracles and the
/// simulation harness.
class Law {
 public:
  static Law normal();
  /// Density exp(-|x|) / 2.
  static Law laplace();
  static Law cauchy();
  static Law huber(double k1, double k2);
  /// Accepts "normal", "laplace", "cauchy" or "huber" (the latter with k1, k2).
  static Law from_name(const std::string& name, double k1 = 1.0, double k2 = 1.0);

  LawKind kind() const noexcept { return kind_; }
  std::string name() const;
  const std::optional<ExtendedHuber>& huber_params() const noexcept { return huber_; }

  double pdf(double x) const;
  double cdf(double x) const;
  double quantile(double u) const;
  /// (log f)'(x).
  double score(double x) const;
  /// (log f)''(x); the Laplace kink at 0 is a point mass not represented here.
  double score_derivative(double x) const;
  /// Fisher information for location.
  double fisher_information() const;
  std::vector<double> sample(std::size_t n, std::uint64_t seed) const;

 private:
  explicit Law(LawKind kind) : kind_(kind) {}

  LawKind kind_;
  std::optional<ExtendedHuber> huber_;
};

}  // namespace qte
