// steady_state.hpp: classical steady state of the driven two-cavity
// mechanical system, plus a time-domain mean-field integrator used as an
// independent check.

#pragma once

#include "hybridoem/core_model.hpp"

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

namespace hoem {

using cplx = std::complex<double>;

struct SteadyState {
    double n_o{0.0};
    double n_e{0.0};
    double Q_s{0.0};  ///< static displacement of Q = c + c^dagger
    cplx a_s{};
    cplx b_s{};
    double Delta_o_eff{0.0};  ///< Delta_o - g_o Q_s
    double Delta_e_eff{0.0};  ///< Delta_e - g_e Q_s
    double residual{0.0};     ///< max relative residual of the photon-number equations
    bool multistable{false};
};

struct SolverOptions {
    double damping{0.5};  ///< alpha in n <- (1 - alpha) n + alpha F(n)
    double tolerance{1e-12};
    int max_iterations{100000};
    int seed_count{3};  ///< how many of {zero, undetuned, continuation} seeds to try

    void validate() const;
};

struct PhotonNumbers {
    double n_o{0.0};
    double n_e{0.0};
};

struct FixedPointResult {
    double n_o{0.0};
    double n_e{0.0};
    double residual{0.0};
    bool multistable{false};
    int iterations{0};
    std::vector<PhotonNumbers> roots;  ///< distinct converged roots, primary first
};

/// Right-hand side of the coupled photon-number equations,
///   n_o = kappa_o_ext E_o^2 / (kappa_o^2 + [Delta_o - (2 g_o / omega_m)(g_o n_o + g_e n_e)]^2)
/// and likewise for n_e.
PhotonNumbers photon_number_map(const SystemParams& p, const DriveConfig& d, PhotonNumbers n);

/// max over both equations of |n - F(n)| / max(n, 1).
double photon_number_residual(const SystemParams& p, const DriveConfig& d, PhotonNumbers n);

/// Damped fixed-point iteration with a bracketed Newton fallback, started from
/// up to three seeds (zero, undetuned estimate, `continuation`). The
/// continuation root is reported when given, the zero-seed root otherwise.
/// Throws SolverError when the primary seed does not converge.
FixedPointResult photon_number_fixed_point(const SystemParams& p, const DriveConfig& d,
                                           const SolverOptions& opts = {},
                                           std::optional<PhotonNumbers> continuation = std::nullopt);

/// Builds fields, displacement and effective detunings from converged photon
/// numbers. Throws ConsistencyError if |a_s|^2 or |b_s|^2 deviates from the
/// supplied n by more than 1e-6 relative.
SteadyState steady_state_fields(const SystemParams& p, const DriveConfig& d, double n_o, double n_e);

/// Validation, fixed point and fields in one call.
SteadyState solve_steady_state(const SystemParams& p, const DriveConfig& d, const SolverOptions& opts = {},
                               std::optional<PhotonNumbers> continuation = std::nullopt);

struct MeanFieldOptions {
    double max_time{1.0};            ///< s
    double initial_step{1e-10};      ///< s
    double rel_tol{1e-10};
    int steps_per_period_min{8};     ///< caps the step at one mechanical period divided by this
    double abs_tol{1e-9};
    double settle_tolerance{1e-10};  ///< relative spread of |a|^2, |b|^2, Q over one mechanical period
    double divergence_growth{100.0}; ///< Q spread growth over the early transient that counts as divergence
    int samples_per_period{16};
    int reference_periods{20};
};

struct MeanFieldOutcome {
    SteadyState state;
    double settle_time{0.0};
    std::size_t steps{0};
    double final_spread{0.0};
};

/// Integrates the noise-free mean-field equations for (a, b, Q, dQ/dt / omega_m) from the
/// vacuum with the probe off until every observable varies by less than
/// settle_tolerance (relative) over one mechanical period.
/// Throws InstabilityError on divergence and TimeoutError past max_time.
MeanFieldOutcome mean_field_evolution_oracle(const SystemParams& p, const DriveConfig& d,
                                             const MeanFieldOptions& opts = {});

}  // namespace hoem
