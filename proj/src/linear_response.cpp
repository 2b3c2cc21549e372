#include "hybridoem/linear_response.hpp"

#include "hybridoem/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <sstream>

namespace hoem {

namespace {

constexpr cplx I{0.0, 1.0};

[[noreturn]] void throw_pole(double delta) {
    std::ostringstream os;
    os << "response denominator f(delta) vanishes at delta = " << delta << " rad/s";
    throw SingularityError(os.str(), delta);
}

cplx checked_f(double delta, const SystemParams& p, const SteadyState& ss) {
    const cplx f = effective_mechanical_denominator(delta, p, ss);
    if (f == cplx{} || !std::isfinite(f.real()) || !std::isfinite(f.imag())) throw_pole(delta);
    return f;
}

/// d f / d delta
cplx denominator_derivative(double delta, const SystemParams& p, const SteadyState& ss) {
    auto cavity = [delta](double kappa, double Dp, double g, double n) {
        const cplx k = kappa - I * delta;
        const cplx D = k * k + Dp * Dp;
        return 4.0 * I * Dp * g * g * n * k / (D * D);
    };
    const cplx mech = (2.0 * delta + I * p.gamma_m) / (2.0 * p.omega_m);
    return cavity(p.kappa_o, ss.Delta_o_eff, p.g_o, ss.n_o) + cavity(p.kappa_e, ss.Delta_e_eff, p.g_e, ss.n_e) +
           mech;
}

/// d t / d delta of the closed form.
cplx transmission_derivative(double delta, const SystemParams& p, const SteadyState& ss) {
    const cplx A = cplx(p.kappa_o, ss.Delta_o_eff - delta);
    const cplx f = checked_f(delta, p, ss);
    const cplx df = denominator_derivative(delta, p, ss);
    const double c = p.g_o * p.g_o * ss.n_o * p.kappa_o_ext;
    // t = 1 - kappa_ext / A + i c / (f A^2),  dA/ddelta = -i
    const cplx d_bare = -p.kappa_o_ext * I / (A * A);
    const cplx d_mech = I * c * (2.0 * I / (f * A * A * A) - df / (f * f * A * A));
    return d_bare + d_mech;
}

}  // namespace

cplx effective_mechanical_denominator(double delta, const SystemParams& p, const SteadyState& ss) {
    auto cavity = [delta](double kappa, double Dp, double g, double n) {
        const cplx k = kappa - I * delta;
        return 2.0 * Dp * g * g * n / (k * k + Dp * Dp);
    };
    const cplx mech = cplx(p.omega_m * p.omega_m - delta * delta, -delta * p.gamma_m) / (2.0 * p.omega_m);
    return cavity(p.kappa_o, ss.Delta_o_eff, p.g_o, ss.n_o) + cavity(p.kappa_e, ss.Delta_e_eff, p.g_e, ss.n_e) -
           mech;
}

cplx probe_sideband_amplitude(double delta, const SystemParams& p, const DriveConfig& d, const SteadyState& ss) {
    const double E_p = drive_amplitudes(p, d).E_p;
    const cplx A = cplx(p.kappa_o, ss.Delta_o_eff - delta);
    const double drive = std::sqrt(p.kappa_o_ext) * E_p;
    const cplx f = checked_f(delta, p, ss);
    return drive / A - (I * p.g_o * p.g_o * ss.n_o / f) * drive / (A * A);
}

FluctuationAmplitudes fluctuation_linear_solve(double delta, const SystemParams& p, const DriveConfig& d,
                                               const SteadyState& ss) {
    using Mat6 = Eigen::Matrix<cplx, 6, 6>;
    using Vec6 = Eigen::Matrix<cplx, 6, 1>;
    const double E_p = drive_amplitudes(p, d).E_p;
    const cplx a = ss.a_s, b = ss.b_s;
    const cplx mech = cplx(p.omega_m * p.omega_m - delta * delta, -delta * p.gamma_m) / (2.0 * p.omega_m);

    // unknowns: a+, conj(a-), b+, conj(b-), Q+, conj(Q-)
    Mat6 M = Mat6::Zero();
    M(0, 0) = cplx(p.kappa_o, ss.Delta_o_eff - delta);
    M(0, 4) = -I * p.g_o * a;
    M(1, 1) = cplx(p.kappa_o, -ss.Delta_o_eff - delta);
    M(1, 5) = I * p.g_o * std::conj(a);
    M(2, 2) = cplx(p.kappa_e, ss.Delta_e_eff - delta);
    M(2, 4) = -I * p.g_e * b;
    M(3, 3) = cplx(p.kappa_e, -ss.Delta_e_eff - delta);
    M(3, 5) = I * p.g_e * std::conj(b);
    // Displacement equation divided by 2 omega_m; rows 4 and 5 are the
    // e^{-i delta t} part and the conjugate of the e^{+i delta t} part.
    for (int r : {4, 5}) {
        M(r, r) = mech;
        M(r, 0) = -p.g_o * std::conj(a);
        M(r, 1) = -p.g_o * a;
        M(r, 2) = -p.g_e * std::conj(b);
        M(r, 3) = -p.g_e * b;
    }
    Vec6 rhs = Vec6::Zero();
    rhs(0) = std::sqrt(p.kappa_o_ext) * E_p;

    const Eigen::PartialPivLU<Mat6> lu(M);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-15)) {
        std::ostringstream os;
        os << "linearized fluctuation system is singular at delta = " << delta << " rad/s (rcond " << rcond << ")";
        throw SingularityError(os.str(), delta);
    }
    const Vec6 y = lu.solve(rhs);
    return {y(0), std::conj(y(1)), y(2), std::conj(y(3)), y(4), std::conj(y(5))};
}

cplx transmission_coefficient(double delta, const SystemParams& p, const SteadyState& ss) {
    const cplx A = cplx(p.kappa_o, ss.Delta_o_eff - delta);
    const cplx f = checked_f(delta, p, ss);
    const double k = p.kappa_o_ext;
    return 1.0 - (k / A - (1.0 / f) * I * p.g_o * p.g_o * ss.n_o * k / (A * A));
}

cplx probe_transmission(double delta, const SystemParams& p, const DriveConfig& d, const SteadyState& ss) {
    if (!(drive_amplitudes(p, d).E_p > 0.0)) throw DomainError("probe_transmission requires a nonzero probe");
    return transmission_coefficient(delta, p, ss);
}

OutputFieldComponents output_field_components(double delta, const SystemParams& p, const DriveConfig& d,
                                              const SteadyState& ss) {
    const double E_p = drive_amplitudes(p, d).E_p;
    if (!(E_p > 0.0)) throw DomainError("output_field_components requires a nonzero probe");
    const double root_k = std::sqrt(p.kappa_o_ext);
    const cplx a_plus = probe_sideband_amplitude(delta, p, d, ss);
    const auto fl = fluctuation_linear_solve(delta, p, d, ss);
    return {E_p - root_k * a_plus, -root_k * fl.a_minus};
}

ResponsePoint evaluate_response(double delta, const SystemParams& p, const DriveConfig& d, const SteadyState& ss) {
    ResponsePoint r;
    r.delta = delta;
    r.Delta_p = probe_cavity_detuning(delta, d.Delta_o);
    r.f_val = checked_f(delta, p, ss);
    r.a_plus = probe_sideband_amplitude(delta, p, d, ss);
    const auto fl = fluctuation_linear_solve(delta, p, d, ss);
    r.a_minus = fl.a_minus;
    r.b_plus = fl.b_plus;
    r.b_minus = fl.b_minus;
    r.Q_plus = fl.Q_plus;
    r.t = transmission_coefficient(delta, p, ss);
    r.t_sq = std::norm(r.t);
    r.phase = std::arg(r.t);
    return r;
}

DelayResult group_delay(const SystemParams& p, const DriveConfig& d, const SteadyState& ss, DelayMethod method,
                        double step) {
    constexpr double kMinModulus = 1e-9;
    const double delta0 = pump_probe_detuning(0.0, d.Delta_o);
    DelayResult out;
    out.method = method;

    if (method == DelayMethod::analytic) {
        const cplx t = transmission_coefficient(delta0, p, ss);
        if (std::abs(t) < kMinModulus) throw IllConditionedDelayError("transmission vanishes at Delta_p = 0");
        out.tau_g = (transmission_derivative(delta0, p, ss) / t).imag();
        return out;
    }

    const double h = step > 0.0 ? step : p.gamma_m / 100.0;
    auto central = [&](double hh) {
        const cplx lo = transmission_coefficient(delta0 - hh, p, ss);
        const cplx hi = transmission_coefficient(delta0 + hh, p, ss);
        if (std::abs(lo) < kMinModulus || std::abs(hi) < kMinModulus) {
            throw IllConditionedDelayError("transmission vanishes inside the group-delay stencil");
        }
        const double dphi = std::arg(hi * std::conj(lo));
        if (std::abs(dphi) > 0.5 * std::numbers::pi) {
            throw IllConditionedDelayError("phase jump inside the group-delay stencil");
        }
        return dphi / (2.0 * hh);
    };
    const double coarse = central(h);
    const double fine = central(0.5 * h);
    out.tau_g = (4.0 * fine - coarse) / 3.0;
    out.step = h;
    out.richardson_error = std::abs(fine - coarse) / 3.0;
    return out;
}

}  // namespace hoem
