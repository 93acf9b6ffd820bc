#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "qte/kernel_density.hpp"
#include "qte/sample.hpp"

namespace qte {

using Theta = Eigen::VectorXd;

// Gradients and Hessians in theta of h^{-1}(y, theta) and log dh^{-1}/dy.
struct ThetaDerivatives {
  Eigen::VectorXd grad_h_inv;
  Eigen::MatrixXd hess_h_inv;
  Eigen::VectorXd grad_log_jac;
  Eigen::MatrixXd hess_log_jac;
};

// Y(1) = h(Y(0), theta) with h strictly increasing in y. Implementations must
// be stateless so they can be shared across threads.
class TreatmentModel {
 public:
  virtual ~TreatmentModel() = default;
  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual Theta identity() const = 0;
  virtual bool in_domain(const Theta& theta) const = 0;
  virtual double h(double y, const Theta& theta) const = 0;
  virtual double h_inv(double y, const Theta& theta) const = 0;
  virtual double dh_dy(double y, const Theta& theta) const = 0;
  virtual double dh_inv_dy(double y, const Theta& theta) const = 0;
  // Empty when only finite differences are available.
  virtual std::optional<ThetaDerivatives> theta_derivatives(double y, const Theta& theta) const;
  // Exact solution of the quantile-matching system when one exists.
  virtual std::optional<Theta> match_closed_form(std::span<const double> q0, std::span<const double> q1) const;
};

class AdditiveModel final : public TreatmentModel {
 public:
  std::string name() const override { return "additive"; }
  std::size_t dim() const override { return 1; }
  Theta identity() const override { return Theta::Zero(1); }
  bool in_domain(const Theta& theta) const override { return std::isfinite(theta[0]); }
  double h(double y, const Theta& t) const override { return y + t[0]; }
  double h_inv(double y, const Theta& t) const override { return y - t[0]; }
  double dh_dy(double, const Theta&) const override { return 1.0; }
  double dh_inv_dy(double, const Theta&) const override { return 1.0; }
  std::optional<ThetaDerivatives> theta_derivatives(double y, const Theta& theta) const override;
  std::optional<Theta> match_closed_form(std::span<const double> q0, std::span<const double> q1) const override;
};

class MultiplicativeModel final : public TreatmentModel {
 public:
  std::string name() const override { return "multiplicative"; }
  std::size_t dim() const override { return 1; }
  Theta identity() const override { return Theta::Ones(1); }
  bool in_domain(const Theta& theta) const override { return theta[0] > 0.0 && std::isfinite(theta[0]); }
  double h(double y, const Theta& t) const override { return t[0] * y; }
  double h_inv(double y, const Theta& t) const override { return y / t[0]; }
  double dh_dy(double, const Theta& t) const override { return t[0]; }
  double dh_inv_dy(double, const Theta& t) const override { return 1.0 / t[0]; }
  std::optional<ThetaDerivatives> theta_derivatives(double y, const Theta& theta) const override;
  std::optional<Theta> match_closed_form(std::span<const double> q0, std::span<const double> q1) const override;
};

// h = a + b*y with theta = (a, b), b > 0.
class AffineModel final : public TreatmentModel {
 public:
  std::string name() const override { return "affine"; }
  std::size_t dim() const override { return 2; }
  Theta identity() const override { return Theta{{0.0, 1.0}}; }
  bool in_domain(const Theta& t) const override { return t.allFinite() && t[1] > 0.0; }
  double h(double y, const Theta& t) const override { return t[0] + t[1] * y; }
  double h_inv(double y, const Theta& t) const override { return (y - t[0]) / t[1]; }
  double dh_dy(double, const Theta& t) const override { return t[1]; }
  double dh_inv_dy(double, const Theta& t) const override { return 1.0 / t[1]; }
  std::optional<ThetaDerivatives> theta_derivatives(double y, const Theta& theta) const override;
};

// Throws BadParams unless dh/dy > 0 and h(h^{-1}(y)) = y on the grid.
void validate_model(const TreatmentModel& model, const Theta& theta, std::span<const double> grid);

// Solves F1^{-1}(u_j) = h(F0^{-1}(u_j), theta) for j = 1..d.
Theta quantile_match_init(const TwoSampleView& view, const TreatmentModel& model, std::span<const double> u_list);

enum class ScoreMethod { Analytic, FiniteDifference };

// g(y, theta) = d/dtheta log(f0(h^{-1}(y, theta)) dh^{-1}/dy).
Eigen::VectorXd score_g(const DensityFit& fit0, const TreatmentModel& model, const Theta& theta, double y,
                        ScoreMethod method = ScoreMethod::Analytic);

// Derivative of g in theta; used by the observed-information option.
Eigen::MatrixXd score_g_jacobian(const DensityFit& fit0, const TreatmentModel& model, const Theta& theta, double y,
                                 ScoreMethod method = ScoreMethod::Analytic);

enum class InformationKind { OuterProduct, Observed };

struct OneStepOptions {
  bool split = false;
  std::uint64_t seed = 0;
  InformationKind information = InformationKind::OuterProduct;
  ScoreMethod score = ScoreMethod::Analytic;
  DensityConfig density{};
};

struct ParametricEstimate {
  Theta theta;
  Theta theta_init;
  Eigen::MatrixXd information;
  Eigen::MatrixXd covariance;
  // First coordinate with its variance, for the common d = 1 case.
  Estimate estimate;
};

Eigen::MatrixXd parametric_information(const DensityFit& fit0, const TreatmentModel& model, const Theta& theta,
                                       std::span<const double> control, InformationKind kind,
                                       ScoreMethod method = ScoreMethod::Analytic);

ParametricEstimate one_step_theta_with_fit(const TwoSampleView& view, const DensityFit& fit0,
                                           const TreatmentModel& model, const Theta& theta_init,
                                           InformationKind kind = InformationKind::OuterProduct,
                                           ScoreMethod method = ScoreMethod::Analytic);

ParametricEstimate one_step_theta(const TwoSampleView& view, const Theta& theta_init, const TreatmentModel& model,
                                  const OneStepOptions& options = {});

double in_sample_ate(const TwoSampleView& view, const TreatmentModel& model, const Theta& theta);
double population_ate(std::span<const double> control, const TreatmentModel& model, const Theta& theta);

struct LevelEffect {
  double tau = 0.0;
  double var = 0.0;
  double tau_log = 0.0;
  double mu0 = 0.0;
  double mu1 = 0.0;
  double p = 0.0;
  double v = 0.0;
};

LevelEffect level_from_log(double tau_log, double mu0, double mu1, double p, double v);

}  // namespace qte
