#pragma once

#include <span>

#include "qte/kernel_density.hpp"

namespace qte::reference {

/// Brute-force serial adaptive fit: every kernel sum runs over all data
/// points. Kept as the test oracle for the windowed parallel kernels.
DensityFit fit_adaptive_density_serial(std::span<const double> data, const DensityConfig& config = {});

}  // namespace qte::reference
