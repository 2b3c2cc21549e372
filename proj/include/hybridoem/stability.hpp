// stability.hpp: linear stability of a steady state from the eigenvalues of
// the fluctuation drift matrix.

#pragma once

#include "hybridoem/core_model.hpp"
#include "hybridoem/steady_state.hpp"

#include <Eigen/Core>

#include <complex>
#include <vector>

namespace hoem {

using DriftMatrix = Eigen::Matrix<std::complex<double>, 6, 6>;

struct StabilityReport {
    double margin{0.0};  ///< max Re(lambda), rad/s
    bool stable{true};   ///< margin < 0
    std::vector<std::complex<double>> eigenvalues;  ///< sorted by descending real part
};

/// Drift matrix over (da, da*, db, db*, dQ, dP) with dP = (d/dt dQ) / omega_m.
/// The momentum is rescaled by omega_m so every entry is of order omega_m; the
/// spectrum is that of the unscaled (dQ, d/dt dQ) system.
DriftMatrix linear_dynamics_matrix(const SystemParams& p, const DriveConfig& d, const SteadyState& ss);

/// Throws NumericalError (with the matrix in the message) if the eigensolver fails.
StabilityReport assess_stability(const SystemParams& p, const DriveConfig& d, const SteadyState& ss);

}  // namespace hoem
