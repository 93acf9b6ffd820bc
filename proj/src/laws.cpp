#include "qte/laws.hpp"

#include <cmath>
#include <numbers>

#include "qte/errors.hpp"
#include "qte/rng.hpp"

namespace qte {

Law Law::normal() { return Law(LawKind::Normal); }
Law Law::laplace() { return Law(LawKind::Laplace); }
Law Law::cauchy() { return Law(LawKind::Cauchy); }

Law Law::huber(double k1, double k2) {
  Law law(LawKind::Huber);
  law.huber_.emplace(k1, k2);
  return law;
}

Law Law::from_name(const std::string& name, double k1, double k2) {
  if (name == "normal") return normal();
  if (name == "laplace" || name == "double-exponential") return laplace();
  if (name == "cauchy") return cauchy();
  if (name == "huber") return huber(k1, k2);
  fail(ErrorKind::BadLaw, "unknown law '" + name + "'");
}

std::string Law::name() const {
  switch (kind_) {
    case LawKind::Normal: return "normal";
    case LawKind::Laplace: return "laplace";
    case LawKind::Cauchy: return "cauchy";
    case LawKind::Huber: return "huber";
  }
  return "unknown";
}

double Law::pdf(double x) const {
  switch (kind_) {
    case LawKind::Normal: return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    case LawKind::Laplace: return 0.5 * std::exp(-std::abs(x));
    case LawKind::Cauchy: return 1.0 / (std::numbers::pi * (1.0 + x * x));
    case LawKind::Huber: return huber_->pdf(x);
  }
  return 0.0;
}

double Law::cdf(double x) const {
  switch (kind_) {
    case LawKind::Normal: return normal_cdf(x);
    case LawKind::Laplace: return x < 0.0 ? 0.5 * std::exp(x) : 1.0 - 0.5 * std::exp(-x);
    case LawKind::Cauchy: return 0.5 + std::atan(x) / std::numbers::pi;
    case LawKind::Huber: return huber_->cdf(x);
  }
  return 0.0;
}

double Law::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) fail(ErrorKind::BadQuantile, "quantile level must lie in (0,1)");
  switch (kind_) {
    case LawKind::Normal: return normal_quantile(u);
    case LawKind::Laplace: return u < 0.5 ? std::log(2.0 * u) : -std::log(2.0 * (1.0 - u));
    case LawKind::Cauchy: return std::tan(std::numbers::pi * (u - 0.5));
    case LawKind::Huber: return huber_->quantile(u);
  }
  return 0.0;
}

double Law::score(double x) const {
  switch (kind_) {
    case LawKind::Normal: return -x;
    case LawKind::Laplace: return x > 0.0 ? -1.0 : (x < 0.0 ? 1.0 : 0.0);
    case LawKind::Cauchy: return -2.0 * x / (1.0 + x * x);
    case LawKind::Huber: return huber_->score(x);
  }
  return 0.0;
}

double Law::score_derivative(double x) const {
  switch (kind_) {
    case LawKind::Normal: return -1.0;
    case LawKind::Laplace: return 0.0;
    case LawKind::Cauchy: {
      const double q = 1.0 + x * x;
      return -2.0 * (1.0 - x * x) / (q * q);
    }
    case LawKind::Huber: return huber_->score_derivative(x);
  }
  return 0.0;
}

double Law::fisher_information() const {
  switch (kind_) {
    case LawKind::Normal: return 1.0;
    case LawKind::Laplace: return 1.0;
    case LawKind::Cauchy: return 0.5;
    case LawKind::Huber: return 1.0 - huber_->alpha() - huber_->beta();
  }
  return 0.0;
}

std::vector<double> Law::sample(std::size_t n, std::uint64_t seed) const {
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = quantile(open_uniform(rng));
  return out;
}

}  // namespace qte
