#include "hybridoem/core_model.hpp"

#include "hybridoem/errors.hpp"

#include <cmath>
#include <sstream>

namespace hoem {

std::string_view to_string(Convention c) {
    switch (c) {
        case Convention::standard: return "standard";
        case Convention::paper_literal: return "paper-literal";
    }
    return "standard";
}

std::optional<Convention> parse_convention(std::string_view name) {
    if (name == "standard") return Convention::standard;
    if (name == "paper-literal" || name == "paper_literal") return Convention::paper_literal;
    return std::nullopt;
}

SystemParams SystemParams::reference() {
    SystemParams p;
    p.omega_o = kTwoPi * 282e12;
    p.omega_e = kTwoPi * 7.1e9;
    p.kappa_o = kTwoPi * 1.65e6;
    p.kappa_e = kTwoPi * 1.6e6;
    p.kappa_o_ext = 0.76 * p.kappa_o;
    p.kappa_e_ext = 0.11 * p.kappa_e;
    p.g_o = kTwoPi * 27.0;
    p.g_e = kTwoPi * 2.7;
    p.omega_m = kTwoPi * 5.6e6;
    p.gamma_m = kTwoPi * 4.0;
    return p;
}

namespace {

void require_positive(std::vector<std::string>& out, const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        std::ostringstream os;
        os << name << " must be positive and finite (got " << v << ")";
        out.push_back(os.str());
    }
}

void require_nonnegative(std::vector<std::string>& out, const char* name, double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
        std::ostringstream os;
        os << name << " must be nonnegative and finite (got " << v << ")";
        out.push_back(os.str());
    }
}

}  // namespace

ValidationReport validate_params(const SystemParams& p, const DriveConfig& d) {
    ValidationReport r;
    auto& v = r.violations;
    require_positive(v, "omega_o", p.omega_o);
    require_positive(v, "omega_e", p.omega_e);
    require_positive(v, "omega_m", p.omega_m);
    require_positive(v, "kappa_o", p.kappa_o);
    require_positive(v, "kappa_e", p.kappa_e);
    require_positive(v, "kappa_o_ext", p.kappa_o_ext);
    require_positive(v, "kappa_e_ext", p.kappa_e_ext);
    require_nonnegative(v, "g_o", p.g_o);
    require_nonnegative(v, "g_e", p.g_e);
    require_positive(v, "gamma_m", p.gamma_m);
    if (p.kappa_o_ext > p.kappa_o) v.emplace_back("kappa_o_ext exceeds kappa_o: external rate cannot exceed total");
    if (p.kappa_e_ext > p.kappa_e) v.emplace_back("kappa_e_ext exceeds kappa_e: external rate cannot exceed total");

    require_nonnegative(v, "P_o", d.P_o);
    require_nonnegative(v, "P_e", d.P_e);
    require_nonnegative(v, "P_p", d.P_p);
    if (!std::isfinite(d.Delta_o)) v.emplace_back("Delta_o must be finite");
    if (!std::isfinite(d.Delta_e)) v.emplace_back("Delta_e must be finite");

    if (d.P_o > 0.0 && d.P_p > 0.01 * d.P_o) {
        r.warnings.emplace_back("probe not weak: P_p exceeds 1% of P_o");
    }
    if (p.kappa_o > 0.0 && p.omega_m / p.kappa_o < 1.0) {
        r.warnings.emplace_back("optical cavity not sideband resolved: omega_m/kappa_o < 1");
    }
    if (p.kappa_e > 0.0 && p.omega_m / p.kappa_e < 1.0) {
        r.warnings.emplace_back("microwave cavity not sideband resolved: omega_m/kappa_e < 1");
    }
    return r;
}

void require_valid(const SystemParams& p, const DriveConfig& d) {
    const auto report = validate_params(p, d);
    if (report.ok()) return;
    std::string msg = "invalid parameters:";
    for (const auto& s : report.violations) msg += "\n  " + s;
    throw ValidationError(msg);
}

double pump_amplitude(double power, double kappa, double omega, Convention convention) {
    if (!(kappa > 0.0)) throw DomainError("pump_amplitude: kappa must be positive");
    if (!(omega > 0.0)) throw DomainError("pump_amplitude: carrier frequency must be positive");
    if (!(power >= 0.0)) throw DomainError("pump_amplitude: power must be nonnegative");
    const double photon_flux = power / (PhysicalConstants::hbar * omega);
    switch (convention) {
        case Convention::standard: return std::sqrt(photon_flux);
        case Convention::paper_literal: return std::sqrt(2.0 * kappa * photon_flux);
    }
    return std::sqrt(photon_flux);
}

DriveAmplitudes drive_amplitudes(const SystemParams& p, const DriveConfig& d) {
    return {pump_amplitude(d.P_o, p.kappa_o, p.omega_o, d.convention),
            pump_amplitude(d.P_e, p.kappa_e, p.omega_e, d.convention),
            pump_amplitude(d.P_p, p.kappa_o, p.omega_o, d.convention)};
}

double bare_resonance_transmission(const SystemParams& p) noexcept {
    const double t = 1.0 - p.kappa_o_ext / p.kappa_o;
    return t * t;
}

}  // namespace hoem
