// sweeps.hpp: probe spectra, pump-power scans and regime classification.

#pragma once

#include "hybridoem/core_model.hpp"
#include "hybridoem/linear_response.hpp"
#include "hybridoem/stability.hpp"
#include "hybridoem/steady_state.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hoem {

/// Uniform grid of probe-cavity detunings Delta_p, rad/s.
struct AxisSpec {
    double min{0.0};
    double max{0.0};
    std::size_t count{2001};

    /// 2001 points over [-3 kappa_o, +3 kappa_o].
    static AxisSpec around_cavity(const SystemParams& p);

    std::vector<double> values() const;
    bool operator==(const AxisSpec&) const = default;
};

struct SweepOptions {
    SolverOptions solver{};
    unsigned threads{0};              ///< 0 = hardware concurrency
    double threshold_rel_tol{1e-3};   ///< bisection bracket width relative to the power
};

/// HYBRIDOEM_THREADS, or 0 (auto) when unset or malformed.
unsigned threads_from_environment();

struct PhaseJump {
    std::size_t index{0};  ///< jump lies between points index-1 and index
    double Delta_p{0.0};
    double jump{0.0};      ///< rad, wrapped into (-pi, pi]
};

struct Spectrum {
    SystemParams params{};
    DriveConfig drive{};
    SteadyState steady{};
    StabilityReport stability{};
    std::vector<double> axis;
    std::vector<ResponsePoint> points;
    ResponsePoint center{};  ///< evaluated exactly at Delta_p = 0
    std::vector<PhaseJump> phase_jumps;  ///< steps above pi/2 between neighbours (transmission zeros)
};

/// One steady-state solve, then the response at every axis point (in parallel
/// when options.threads != 1). Phase is unwrapped in axis order.
Spectrum spectrum_sweep(const SystemParams& p, const DriveConfig& d, const AxisSpec& axis,
                        const SweepOptions& options = {},
                        std::optional<PhotonNumbers> continuation = std::nullopt);

enum class Regime { bare, eit, eia, amplification };

std::string_view to_string(Regime r);

struct RegimeMetrics {
    double center_t_sq{0.0};
    double bare_reference{0.0};
    double max_t_sq{0.0};
    double Delta_p_at_max{0.0};
    std::optional<double> window_width;    ///< FWHM of the feature at Delta_p = 0, rad/s
    std::optional<double> dip_separation;  ///< distance between flanking minima (EIT), rad/s
};

struct RegimeLabel {
    Regime label{Regime::bare};
    RegimeMetrics metrics;
};

/// Precedence AMPLIFICATION > EIA > EIT > BARE. Requires the axis to cover
/// [-3 kappa_o, +3 kappa_o] (CoverageError otherwise).
RegimeLabel classify_regime(const Spectrum& s);

/// Grid argmax refined by a three-point parabola. Returns (Delta_p, |t|^2).
std::pair<double, double> find_peak_transmission(const Spectrum& s);

struct PowerScanPoint {
    double P_o{0.0};
    double t_sq_peak{0.0};  ///< |t|^2 at Delta_p = 0; NaN when the solve failed
    double margin{0.0};     ///< stability margin, rad/s; NaN when the solve failed
    bool stable{false};
    bool multistable{false};
    std::string error;      ///< empty on success
    double residual{0.0};   ///< fixed-point residual (last iterate on failure)
};

struct PowerScan {
    std::vector<PowerScanPoint> points;
    std::optional<double> threshold;               ///< first |t(0)|^2 = 1 crossing, bisection, W
    std::optional<double> threshold_interpolated;  ///< same crossing by linear interpolation of the scan, W
    std::optional<double> instability_threshold;   ///< first sign change of the margin, bisection, W

    std::size_t failures() const;
};

/// Sweeps the optical pump power of `d` over `powers` (strictly increasing),
/// each steady state seeded from the previous one. Solver failures are
/// recorded per point and the scan continues.
PowerScan power_sweep(const SystemParams& p, const DriveConfig& d, const std::vector<double>& powers,
                      const SweepOptions& options = {});

}  // namespace hoem
