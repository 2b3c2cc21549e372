// linear_response.hpp: weak-probe response of the optical cavity around a
// steady state. Closed-form sideband amplitude and transmission, the full
// linearized fluctuation solve, and the group delay of the transmitted probe.
//
// The probe enters at Omega_p = Omega_o + delta; fluctuations are expanded as
//   delta_a = a_plus e^{-i delta t} + a_minus e^{+i delta t}
// and likewise for the microwave field and the displacement Q.

#pragma once

#include "hybridoem/core_model.hpp"
#include "hybridoem/steady_state.hpp"

#include <complex>

namespace hoem {

struct FluctuationAmplitudes {
    cplx a_plus{}, a_minus{};
    cplx b_plus{}, b_minus{};
    cplx Q_plus{}, Q_minus{};
};

struct ResponsePoint {
    double delta{0.0};    ///< Omega_p - Omega_o
    double Delta_p{0.0};  ///< Omega_p - omega_o
    cplx f_val{};
    cplx a_plus{}, a_minus{};
    cplx b_plus{}, b_minus{};
    cplx Q_plus{};
    cplx t{};
    double t_sq{0.0};
    double phase{0.0};  ///< arg t; unwrapped when part of a spectrum
    bool stable{true};
};

struct OutputFieldComponents {
    cplx probe{};             ///< E_p - sqrt(kappa_o_ext) a_plus, at Omega_p
    cplx four_wave_mixing{};  ///< -sqrt(kappa_o_ext) a_minus, at 2 Omega_o - Omega_p
};

enum class DelayMethod { analytic, finite_difference };

struct DelayResult {
    double tau_g{0.0};  ///< s; positive is a delay
    DelayMethod method{DelayMethod::analytic};
    double step{0.0};                ///< rad/s, finite-difference stencil step (0 for analytic)
    double richardson_error{0.0};    ///< |D(h/2) - D(h)| / 3, finite difference only
};

/// Effective mechanical denominator
///   f(delta) = sum_c 2 Delta_c' g_c^2 n_c / ((kappa_c - i delta)^2 + Delta_c'^2)
///              - (omega_m^2 - delta^2 - i delta gamma_m) / (2 omega_m)
/// The mechanical term carries the 1/(2 omega_m) that the linearized equations
/// produce; with it the closed form matches fluctuation_linear_solve exactly.
cplx effective_mechanical_denominator(double delta, const SystemParams& p, const SteadyState& ss);

/// Closed-form a_plus. Throws SingularityError at a pole of 1/f.
cplx probe_sideband_amplitude(double delta, const SystemParams& p, const DriveConfig& d, const SteadyState& ss);

/// Solves the 6x6 system for (a+, a-*, b+, b-*, Q+, Q-*) obtained by collecting
/// the e^{-i delta t} coefficients of the linearized equations. Throws
/// SingularityError when the system is numerically singular.
FluctuationAmplitudes fluctuation_linear_solve(double delta, const SystemParams& p, const DriveConfig& d,
                                               const SteadyState& ss);

/// Probe transmission t = 1 - sqrt(kappa_o_ext) a_plus / E_p, evaluated without
/// reference to E_p. No precondition on the probe power.
cplx transmission_coefficient(double delta, const SystemParams& p, const SteadyState& ss);

/// Same value as transmission_coefficient; requires a nonzero probe (DomainError otherwise).
cplx probe_transmission(double delta, const SystemParams& p, const DriveConfig& d, const SteadyState& ss);

/// Requires a nonzero probe.
OutputFieldComponents output_field_components(double delta, const SystemParams& p, const DriveConfig& d,
                                              const SteadyState& ss);

/// Everything at one probe detuning. a_plus comes from the closed form, the
/// other amplitudes from the linear solve. `stable` is left at its default.
ResponsePoint evaluate_response(double delta, const SystemParams& p, const DriveConfig& d, const SteadyState& ss);

/// d arg t / d Omega_p at Delta_p = 0. `step` <= 0 selects gamma_m / 100.
/// Throws IllConditionedDelayError when |t| nearly vanishes on the stencil.
DelayResult group_delay(const SystemParams& p, const DriveConfig& d, const SteadyState& ss, DelayMethod method,
                        double step = 0.0);

}  // namespace hoem
