// core_model.hpp: parameter containers, drive-amplitude conventions and the
// probe detuning axis shared by every other module.
//
// All frequencies and rates are angular (rad/s); powers are in W.

#pragma once

#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hoem {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct PhysicalConstants {
    /// CODATA 2018 reduced Planck constant, J s.
    static constexpr double hbar = 1.054571817e-34;
};

/// Mapping from applied power to the drive term of the cavity equations.
///   standard:       |E| = sqrt(P / (hbar Omega))            photon-flux amplitude
///   paper_literal:  |E| = sqrt(2 P kappa / (hbar Omega))
enum class Convention { standard, paper_literal };

std::string_view to_string(Convention c);
std::optional<Convention> parse_convention(std::string_view name);

/// Fixed device constants. kappa_o / kappa_e are the amplitude decay rates that
/// appear in the cavity equations of motion (power FWHM is 2 kappa).
struct SystemParams {
    double omega_o{0.0};
    double omega_e{0.0};
    double omega_m{0.0};
    double kappa_o{0.0};
    double kappa_e{0.0};
    double kappa_o_ext{0.0};
    double kappa_e_ext{0.0};
    double g_o{0.0};
    double g_e{0.0};
    double gamma_m{0.0};

    /// Optical/microwave/mechanical device of the reference hybrid system
    /// (282 THz optical, 7.1 GHz microwave, 5.6 MHz mechanics).
    static SystemParams reference();

    bool operator==(const SystemParams&) const = default;
};

struct DriveConfig {
    double P_o{0.0};
    double P_e{0.0};
    double P_p{0.0};
    double Delta_o{0.0};  ///< omega_o - Omega_o
    double Delta_e{0.0};  ///< omega_e - Omega_e
    Convention convention{Convention::standard};

    bool operator==(const DriveConfig&) const = default;
};

/// Drive amplitudes with the pump phases gauged to zero (real, nonnegative).
struct DriveAmplitudes {
    double E_o{0.0};
    double E_e{0.0};
    double E_p{0.0};
};

struct ValidationReport {
    std::vector<std::string> violations;
    std::vector<std::string> warnings;

    bool ok() const noexcept { return violations.empty(); }
    explicit operator bool() const noexcept { return ok(); }
};

/// Collects invariant violations and soft warnings. Never throws.
ValidationReport validate_params(const SystemParams& p, const DriveConfig& d);

/// Throws ValidationError listing every violation when validate_params fails.
void require_valid(const SystemParams& p, const DriveConfig& d);

/// Drive amplitude for power `power` into a mode with decay rate `kappa` at
/// carrier `omega`. Throws DomainError for negative power or nonpositive rates.
double pump_amplitude(double power, double kappa, double omega, Convention convention);

/// Carrier frequencies are approximated by the cavity frequencies (detunings of
/// a few MHz are negligible against THz/GHz carriers).
DriveAmplitudes drive_amplitudes(const SystemParams& p, const DriveConfig& d);

/// Probe-cavity detuning Delta_p = Omega_p - omega_o from the pump-probe
/// detuning delta = Omega_p - Omega_o.
constexpr double probe_cavity_detuning(double delta, double Delta_o) noexcept { return delta - Delta_o; }

/// Inverse of probe_cavity_detuning.
constexpr double pump_probe_detuning(double Delta_p, double Delta_o) noexcept { return Delta_p + Delta_o; }

/// Probe transmission of the undriven cavity on resonance, (1 - kappa_ext/kappa)^2.
double bare_resonance_transmission(const SystemParams& p) noexcept;

}  // namespace hoem
