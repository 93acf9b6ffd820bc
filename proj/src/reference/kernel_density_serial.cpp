#include "qte/reference/kernel_density_serial.hpp"

#include "../kde_common.hpp"

namespace qte::reference {

DensityFit fit_adaptive_density_serial(std::span<const double> data, const DensityConfig& config) {
  const std::vector<double> x = detail::prepare_density_data(data, config);
  const std::span<const double> xs(x);
  const std::size_t m = x.size();
  const detail::Bandwidths bw = detail::rule_of_thumb(xs);

  DensityEstimates est;
  est.grid = quantile_grid(xs);
  est.h = bw.h;
  est.h1 = bw.h1;
  est.h2 = bw.h2;
  est.sigma_hat = bw.sigma;

  std::vector<double> pilot(m);
  for (std::size_t i = 0; i < m; ++i) pilot[i] = detail::pilot_sum(x[i], xs, bw.h, 0, m);
  est.g = detail::local_factors(pilot, config.alpha, est.lambda);

  const std::size_t k = est.grid.size();
  est.fhat.resize(k);
  est.fhat1.resize(k);
  est.fhat2.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    const auto s = detail::adaptive_sums(est.grid[j], xs, est.lambda, bw, 0, m);
    est.fhat[j] = s.f;
    est.fhat1[j] = s.f1;
    est.fhat2[j] = s.f2;
  }
  return DensityFit(std::move(est), config.floor);
}

}  // namespace qte::reference
