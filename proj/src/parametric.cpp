#include "qte/parametric.hpp"

#include <algorithm>
#include <cmath>

#include "qte/errors.hpp"
#include "qte/shift.hpp"

namespace qte {

std::optional<ThetaDerivatives> TreatmentModel::theta_derivatives(double, const Theta&) const { return std::nullopt; }

std::optional<Theta> TreatmentModel::match_closed_form(std::span<const double>, std::span<const double>) const {
  return std::nullopt;
}

std::optional<ThetaDerivatives> AdditiveModel::theta_derivatives(double, const Theta&) const {
  return ThetaDerivatives{Eigen::VectorXd::Constant(1, -1.0), Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1),
                          Eigen::MatrixXd::Zero(1, 1)};
}

std::optional<Theta> AdditiveModel::match_closed_form(std::span<const double> q0, std::span<const double> q1) const {
  return Theta::Constant(1, q1[0] - q0[0]);
}

std::optional<ThetaDerivatives> MultiplicativeModel::theta_derivatives(double y, const Theta& t) const {
  const double th = t[0];
  return ThetaDerivatives{Eigen::VectorXd::Constant(1, -y / (th * th)),
                          Eigen::MatrixXd::Constant(1, 1, 2.0 * y / (th * th * th)),
                          Eigen::VectorXd::Constant(1, -1.0 / th), Eigen::MatrixXd::Constant(1, 1, 1.0 / (th * th))};
}

std::optional<Theta> MultiplicativeModel::match_closed_form(std::span<const double> q0,
                                                            std::span<const double> q1) const {
  if (!(q0[0] > 0.0 && q1[0] > 0.0)) return std::nullopt;
  return Theta::Constant(1, q1[0] / q0[0]);
}

std::optional<ThetaDerivatives> AffineModel::theta_derivatives(double y, const Theta& t) const {
  const double a = t[0];
  const double b = t[1];
  ThetaDerivatives d;
  d.grad_h_inv = Eigen::Vector2d(-1.0 / b, -(y - a) / (b * b));
  d.hess_h_inv = Eigen::Matrix2d{{0.0, 1.0 / (b * b)}, {1.0 / (b * b), 2.0 * (y - a) / (b * b * b)}};
  d.grad_log_jac = Eigen::Vector2d(0.0, -1.0 / b);
  d.hess_log_jac = Eigen::Matrix2d{{0.0, 0.0}, {0.0, 1.0 / (b * b)}};
  return d;
}

void validate_model(const TreatmentModel& model, const Theta& theta, std::span<const double> grid) {
  if (static_cast<std::size_t>(theta.size()) != model.dim() || !model.in_domain(theta)) {
    fail(ErrorKind::BadParams, "theta outside the model domain");
  }
  for (double y : grid) {
    const double slope = model.dh_dy(y, theta);
    if (!(slope > 0.0) || !std::isfinite(slope)) fail(ErrorKind::BadParams, "treatment map is not increasing");
    const double back = model.h(model.h_inv(y, theta), theta);
    if (!(std::abs(back - y) <= 1e-9 * std::max(1.0, std::abs(y)))) {
      fail(ErrorKind::BadParams, "h and h_inv are not inverse to each other");
    }
  }
}

// ---------------------------------------------------------------- init

namespace {

constexpr int kNewtonCap = 100;
constexpr double kNewtonTol = 1e-10;

Eigen::VectorXd match_residual(const TreatmentModel& model, const Theta& theta, std::span<const double> q0,
                               std::span<const double> q1) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(q0.size()));
  for (std::size_t j = 0; j < q0.size(); ++j) r[static_cast<Eigen::Index>(j)] = model.h(q0[j], theta) - q1[j];
  return r;
}

Theta bisect_scalar(const TreatmentModel& model, std::span<const double> q0, std::span<const double> q1) {
  auto r = [&](double t) { return model.h(q0[0], Theta::Constant(1, t)) - q1[0]; };
  auto ok = [&](double t) { return model.in_domain(Theta::Constant(1, t)); };
  const double t0 = model.identity()[0];
  const double r0 = r(t0);
  if (r0 == 0.0) return Theta::Constant(1, t0);
  const double scale = std::max({1.0, std::abs(t0), std::abs(q1[0] - q0[0])});
  double lo = t0, hi = t0, step = scale;
  bool found = false;
  double a = t0, b = t0;
  for (int k = 0; k < 200 && !found; ++k, step *= 2.0) {
    double s = step;
    double cand_lo = lo - s;
    while (!ok(cand_lo) && s > 1e-300) cand_lo = lo - (s *= 0.5);
    if (ok(cand_lo) && cand_lo < lo) {
      lo = cand_lo;
      if ((r(lo) > 0.0) != (r0 > 0.0)) a = lo, b = t0, found = true;
    }
    if (found) break;
    s = step;
    double cand_hi = hi + s;
    while (!ok(cand_hi) && s > 1e-300) cand_hi = hi + (s *= 0.5);
    if (ok(cand_hi) && cand_hi > hi) {
      hi = cand_hi;
      if ((r(hi) > 0.0) != (r0 > 0.0)) a = t0, b = hi, found = true;
    }
  }
  if (!found) fail(ErrorKind::NoSolution, "quantile matching found no sign change");
  double ra = r(a);
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    const double rm = r(mid);
    if (rm == 0.0) return Theta::Constant(1, mid);
    if ((rm > 0.0) == (ra > 0.0)) {
      a = mid;
      ra = rm;
    } else {
      b = mid;
    }
  }
  const double t = std::abs(r(a)) <= std::abs(r(b)) ? a : b;
  if (!(std::abs(r(t)) <= 1e-8 * std::max(1.0, std::abs(q1[0])))) {
    fail(ErrorKind::NoSolution, "quantile matching residual above tolerance");
  }
  return Theta::Constant(1, t);
}

Theta damped_newton(const TreatmentModel& model, std::span<const double> q0, std::span<const double> q1) {
  const Eigen::Index d = static_cast<Eigen::Index>(model.dim());
  Theta theta = model.identity();
  Eigen::VectorXd r = match_residual(model, theta, q0, q1);
  double q_scale = 1.0;
  for (double v : q1) q_scale = std::max(q_scale, std::abs(v));
  for (int it = 0; it < kNewtonCap; ++it) {
    if (r.norm() <= kNewtonTol * q_scale) return theta;
    Eigen::MatrixXd jac(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
      const double step = 1e-6 * (1.0 + std::abs(theta[k]));
      Theta up = theta, dn = theta;
      up[k] += step;
      dn[k] -= step;
      jac.col(k) = (match_residual(model, up, q0, q1) - match_residual(model, dn, q0, q1)) / (2.0 * step);
    }
    const Eigen::VectorXd delta = jac.colPivHouseholderQr().solve(-r);
    if (!delta.allFinite()) break;
    double damp = 1.0;
    bool moved = false;
    for (int h = 0; h < 40; ++h, damp *= 0.5) {
      const Theta trial = theta + damp * delta;
      if (!model.in_domain(trial)) continue;
      const Eigen::VectorXd rt = match_residual(model, trial, q0, q1);
      if (rt.norm() < r.norm()) {
        theta = trial;
        r = rt;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  if (r.norm() <= kNewtonTol * q_scale) return theta;
  fail(ErrorKind::NoSolution, "quantile matching did not converge");
}

}  // namespace

Theta quantile_match_init(const TwoSampleView& view, const TreatmentModel& model, std::span<const double> u_list) {
  if (u_list.size() != model.dim()) fail(ErrorKind::BadParams, "need one matching quantile per parameter");
  for (std::size_t j = 0; j < u_list.size(); ++j) {
    if (!(u_list[j] > 0.0 && u_list[j] < 1.0) || (j > 0 && !(u_list[j] > u_list[j - 1]))) {
      fail(ErrorKind::BadQuantile, "matching quantiles must increase strictly inside (0,1)");
    }
  }
  std::vector<double> q0(u_list.size()), q1(u_list.size());
  for (std::size_t j = 0; j < u_list.size(); ++j) {
    q0[j] = empirical_quantile(view.control(), u_list[j]);
    q1[j] = empirical_quantile(view.treated(), u_list[j]);
  }
  if (auto closed = model.match_closed_form(q0, q1); closed && model.in_domain(*closed)) return *closed;
  return model.dim() == 1 ? bisect_scalar(model, q0, q1) : damped_newton(model, q0, q1);
}

// ---------------------------------------------------------------- score

namespace {

double log_f1(const DensityFit& fit0, const TreatmentModel& model, const Theta& theta, double y) {
  return fit0.log_density(model.h_inv(y, theta)) + std::log(model.dh_inv_dy(y, theta));
}

double fd_step(double t) { return 1e-5 * (1.0 + std::abs(t)); }

void check_finite(const Eigen::MatrixXd& m) {
  if (!m.allFinite()) fail(ErrorKind::DegenerateDensity, "score is not finite at this point");
}

}  // namespace

Eigen::VectorXd score_g(const DensityFit& fit0, const TreatmentModel& model, const Theta& theta, double y,
                        ScoreMethod method) {
  std::optional<ThetaDerivatives> d;
  if (method == ScoreMethod::Analytic) d = model.theta_derivatives(y, theta);
  Eigen::VectorXd g;
  if (d) {
    g = fit0.lpsi(model.h_inv(y, theta), 1) * d->grad_h_inv + d->grad_log_jac;
  } else {
    g.resize(theta.size());
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      const double step = fd_step(theta[k]);
      Theta up = theta, dn = theta;
      up[k] += step;
      dn[k] -= step;
      g[k] = (log_f1(fit0, model, up, y) - log_f1(fit0, model, dn, y)) / (up[k] - dn[k]);
    }
  }
  check_finite(g);
  return g;
}

Eigen::MatrixXd score_g_jacobian(const DensityFit& fit0, const TreatmentModel& model, const Theta& theta, double y,
                                 ScoreMethod method) {
  std::optional<ThetaDerivatives> d;
  if (method == ScoreMethod::Analytic) d = model.theta_derivatives(y, theta);
  Eigen::MatrixXd jac;
  if (d) {
    const double x = model.h_inv(y, theta);
    jac = fit0.lpsi(x, 2) * d->grad_h_inv * d->grad_h_inv.transpose() + fit0.lpsi(x, 1) * d->hess_h_inv +
          d->hess_log_jac;
  } else {
    jac.resize(theta.size(), theta.size());
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      const double step = fd_step(theta[k]);
      Theta up = theta, dn = theta;
      up[k] += step;
      dn[k] -= step;
      jac.col(k) = (score_g(fit0, model, up, y, method) - score_g(fit0, model, dn, y, method)) / (up[k] - dn[k]);
    }
    jac = 0.5 * (jac + jac.transpose()).eval();
  }
  check_finite(jac);
  return jac;
}

// ---------------------------------------------------------------- one-step

Eigen::MatrixXd parametric_information(const DensityFit& fit0, const TreatmentModel& model, const Theta& theta,
                                       std::span<const double> control, InformationKind kind, ScoreMethod method) {
  const Eigen::Index d = theta.size();
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(d, d);
  for (double y0 : control) {
    const double y = model.h(y0, theta);
    if (kind == InformationKind::OuterProduct) {
      const Eigen::VectorXd g = score_g(fit0, model, theta, y, method);
      info.noalias() += g * g.transpose();
    } else {
      info -= score_g_jacobian(fit0, model, theta, y, method);
    }
  }
  info /= static_cast<double>(control.size());
  Eigen::LLT<Eigen::MatrixXd> llt(info);
  if (!info.allFinite() || llt.info() != Eigen::Success) {
    fail(ErrorKind::DegenerateInfo, "estimated information is not positive definite");
  }
  return info;
}

namespace {

// Sum over the units of `half` of the bracketed part of the influence
// function, before multiplying by the inverse information.
Eigen::VectorXd psi_core_sum(const DensityFit& fit0, const TreatmentModel& model, const Theta& theta,
                             const TwoSampleView& half, double p, ScoreMethod method) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(theta.size());
  for (double y : half.treated()) s += score_g(fit0, model, theta, y, method) / p;
  for (double y : half.control()) s -= score_g(fit0, model, theta, model.h(y, theta), method) / (1.0 - p);
  return s;
}

ParametricEstimate finish(const Theta& theta, const Theta& init, const Eigen::MatrixXd& info, double p, double n) {
  ParametricEstimate out;
  out.theta = theta;
  out.theta_init = init;
  out.information = info;
  out.covariance = info.inverse() / (p * (1.0 - p) * n);
  out.estimate.method = Method::Parametric;
  out.estimate.tau_hat = theta[0];
  out.estimate.var_hat = out.covariance(0, 0);
  out.estimate.diagnostics["information"] = info(0, 0);
  out.estimate.diagnostics["theta_init"] = init[0];
  out.estimate.series["theta"] = std::vector<double>(theta.data(), theta.data() + theta.size());
  return out;
}

}  // namespace

ParametricEstimate one_step_theta_with_fit(const TwoSampleView& view, const DensityFit& fit0,
                                           const TreatmentModel& model, const Theta& theta_init, InformationKind kind,
                                           ScoreMethod method) {
  if (!model.in_domain(theta_init)) fail(ErrorKind::BadParams, "initial theta outside the model domain");
  const Eigen::MatrixXd info = parametric_information(fit0, model, theta_init, view.control(), kind, method);
  // (1/n) sum psi reduces to mean_1 g(Y1) - mean_0 g(h(Y0)) because p = n1/n.
  Eigen::VectorXd g1 = Eigen::VectorXd::Zero(theta_init.size());
  for (double y : view.treated()) g1 += score_g(fit0, model, theta_init, y, method);
  Eigen::VectorXd g0 = Eigen::VectorXd::Zero(theta_init.size());
  for (double y : view.control()) g0 += score_g(fit0, model, theta_init, model.h(y, theta_init), method);
  const Eigen::VectorXd drift = g1 / static_cast<double>(view.n1()) - g0 / static_cast<double>(view.n0());
  const Theta theta = theta_init + info.llt().solve(drift);
  return finish(theta, theta_init, info, view.p(), static_cast<double>(view.n()));
}

ParametricEstimate one_step_theta(const TwoSampleView& view, const Theta& theta_init, const TreatmentModel& model,
                                  const OneStepOptions& options) {
  if (!options.split) {
    const DensityFit fit0 = fit_adaptive_density(view.control(), options.density);
    return one_step_theta_with_fit(view, fit0, model, theta_init, options.information, options.score);
  }
  const auto [a, b] = split_halves(view, options.seed);
  const DensityFit fit_a = fit_adaptive_density(a.control(), options.density);
  const DensityFit fit_b = fit_adaptive_density(b.control(), options.density);
  const double p = view.p();
  const double n = static_cast<double>(view.n());
  const Eigen::MatrixXd info_a =
      parametric_information(fit_b, model, theta_init, a.control(), options.information, options.score);
  const Eigen::MatrixXd info_b =
      parametric_information(fit_a, model, theta_init, b.control(), options.information, options.score);
  const Eigen::VectorXd step = info_a.llt().solve(psi_core_sum(fit_b, model, theta_init, a, p, options.score)) +
                               info_b.llt().solve(psi_core_sum(fit_a, model, theta_init, b, p, options.score));
  ParametricEstimate out = finish(theta_init + step / n, theta_init, 0.5 * (info_a + info_b), p, n);
  out.estimate.diagnostics["split"] = 1.0;
  return out;
}

double in_sample_ate(const TwoSampleView& view, const TreatmentModel& model, const Theta& theta) {
  double s = 0.0;
  for (double y : view.treated()) s += y - model.h_inv(y, theta);
  for (double y : view.control()) s += model.h(y, theta) - y;
  return s / static_cast<double>(view.n());
}

double population_ate(std::span<const double> control, const TreatmentModel& model, const Theta& theta) {
  double s = 0.0;
  for (double y : control) s += model.h(y, theta) - y;
  return s / static_cast<double>(control.size());
}

LevelEffect level_from_log(double tau_log, double mu0, double mu1, double p, double v) {
  if (!std::isfinite(mu0) || !std::isfinite(mu1)) fail(ErrorKind::BadParams, "level means must be finite");
  if (!(p > 0.0 && p < 1.0)) fail(ErrorKind::BadParams, "treated share must lie in (0,1)");
  if (!(v >= 0.0)) fail(ErrorKind::BadParams, "variance must be nonnegative");
  const double up = std::exp(tau_log);
  const double down = std::exp(-tau_log);
  LevelEffect out{.tau_log = tau_log, .mu0 = mu0, .mu1 = mu1, .p = p, .v = v};
  out.tau = (1.0 - p) * (up - 1.0) * mu0 + p * (1.0 - down) * mu1;
  const double grad = (1.0 - p) * up * mu0 + p * down * mu1;
  out.var = grad * grad * v;
  return out;
}

}  // namespace qte
