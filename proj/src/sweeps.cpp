#include "hybridoem/sweeps.hpp"

#include "hybridoem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numbers>
#include <thread>

namespace hoem {

AxisSpec AxisSpec::around_cavity(const SystemParams& p) { return {-3.0 * p.kappa_o, 3.0 * p.kappa_o, 2001}; }

std::vector<double> AxisSpec::values() const {
    std::vector<double> v(count);
    if (count == 1) {
        v[0] = min;
        return v;
    }
    const double span = max - min;
    const double last = static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) v[i] = min + span * (static_cast<double>(i) / last);
    v.back() = max;
    return v;
}

unsigned threads_from_environment() {
    const char* env = std::getenv("HYBRIDOEM_THREADS");
    if (env == nullptr || *env == '\0') return 0;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 0) return 0;
    return static_cast<unsigned>(v);
}

namespace {

unsigned resolve_threads(unsigned requested, std::size_t work) {
    unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(work, 1)));
}

/// Runs fn(i) for i in [0, n) over contiguous chunks. Rethrows the exception
/// raised at the lowest index, independent of the schedule.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    const unsigned t = resolve_threads(threads, n);
    if (t <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(t);
    std::vector<std::size_t> error_index(t, std::numeric_limits<std::size_t>::max());
    {
        std::vector<std::jthread> pool;
        pool.reserve(t);
        const std::size_t chunk = (n + t - 1) / t;
        for (unsigned w = 0; w < t; ++w) {
            pool.emplace_back([&, w] {
                const std::size_t begin = w * chunk;
                const std::size_t end = std::min(n, begin + chunk);
                for (std::size_t i = begin; i < end; ++i) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[w] = std::current_exception();
                        error_index[w] = i;
                        return;
                    }
                }
            });
        }
    }
    const auto first = std::min_element(error_index.begin(), error_index.end());
    if (*first != std::numeric_limits<std::size_t>::max()) {
        std::rethrow_exception(errors[static_cast<std::size_t>(first - error_index.begin())]);
    }
}

double wrap_phase(double x) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    x -= two_pi * std::round(x / two_pi);
    if (x <= -std::numbers::pi) x += two_pi;
    return x;
}

}  // namespace

Spectrum spectrum_sweep(const SystemParams& p, const DriveConfig& d, const AxisSpec& axis,
                        const SweepOptions& options, std::optional<PhotonNumbers> continuation) {
    if (axis.count < 2) throw DomainError("spectrum axis needs at least two points");
    if (!(axis.max > axis.min)) throw DomainError("spectrum axis must be strictly increasing");

    Spectrum s;
    s.params = p;
    s.drive = d;
    s.steady = solve_steady_state(p, d, options.solver, continuation);
    s.stability = assess_stability(p, d, s.steady);
    s.axis = axis.values();
    s.points.resize(s.axis.size());

    parallel_for(s.axis.size(), options.threads, [&](std::size_t i) {
        auto r = evaluate_response(pump_probe_detuning(s.axis[i], d.Delta_o), p, d, s.steady);
        r.Delta_p = s.axis[i];
        r.stable = s.stability.stable;
        s.points[i] = r;
    });

    for (std::size_t i = 1; i < s.points.size(); ++i) {
        const double step = wrap_phase(s.points[i].phase - s.points[i - 1].phase);
        s.points[i].phase = s.points[i - 1].phase + step;
        if (std::abs(step) > 0.5 * std::numbers::pi) s.phase_jumps.push_back({i, s.axis[i], step});
    }

    s.center = evaluate_response(pump_probe_detuning(0.0, d.Delta_o), p, d, s.steady);
    s.center.Delta_p = 0.0;
    s.center.stable = s.stability.stable;
    const auto nearest = std::min_element(s.axis.begin(), s.axis.end(),
                                          [](double x, double y) { return std::abs(x) < std::abs(y); });
    const auto& anchor = s.points[static_cast<std::size_t>(nearest - s.axis.begin())];
    s.center.phase = anchor.phase + wrap_phase(s.center.phase - anchor.phase);
    return s;
}

std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::bare: return "BARE";
        case Regime::eit: return "EIT";
        case Regime::eia: return "EIA";
        case Regime::amplification: return "AMPLIFICATION";
    }
    return "BARE";
}

std::pair<double, double> find_peak_transmission(const Spectrum& s) {
    if (s.points.empty()) throw DomainError("find_peak_transmission: empty spectrum");
    const auto it = std::max_element(s.points.begin(), s.points.end(),
                                     [](const auto& x, const auto& y) { return x.t_sq < y.t_sq; });
    const auto i = static_cast<std::size_t>(it - s.points.begin());
    if (i == 0 || i + 1 == s.points.size()) return {it->Delta_p, it->t_sq};

    const double x0 = s.points[i - 1].Delta_p, x1 = s.points[i].Delta_p, x2 = s.points[i + 1].Delta_p;
    const double y0 = s.points[i - 1].t_sq, y1 = s.points[i].t_sq, y2 = s.points[i + 1].t_sq;
    // Newton divided differences of the interpolating parabola.
    const double d01 = (y1 - y0) / (x1 - x0);
    const double d12 = (y2 - y1) / (x2 - x1);
    const double c2 = (d12 - d01) / (x2 - x0);
    if (!(c2 < 0.0)) return {x1, y1};
    const double c1 = d01 - c2 * (x0 + x1);
    const double xv = std::clamp(-c1 / (2.0 * c2), x0, x2);
    const double yv = y0 + d01 * (xv - x0) + c2 * (xv - x0) * (xv - x1);
    return {xv, std::max(yv, y1)};
}

namespace {

/// Distance from Delta_p = 0 along `direction` (+1/-1) to the first crossing
/// of |t|^2 = level, found on the exact response.
std::optional<double> level_crossing(const Spectrum& s, double level, double direction) {
    const double center_side = s.center.t_sq - level;
    if (center_side == 0.0) return 0.0;
    auto g = [&](double x) {
        const double delta = pump_probe_detuning(direction * x, s.drive.Delta_o);
        return std::norm(transmission_coefficient(delta, s.params, s.steady)) - level;
    };
    const double reach = std::max(std::abs(s.axis.front()), std::abs(s.axis.back()));
    double lo = 0.0;
    double hi = s.params.gamma_m / 16.0;
    while (hi <= reach) {
        if ((g(hi) > 0.0) != (center_side > 0.0)) {
            for (int k = 0; k < 200 && hi - lo > 1e-12 * hi; ++k) {
                const double mid = 0.5 * (lo + hi);
                if ((g(mid) > 0.0) == (center_side > 0.0)) lo = mid;
                else hi = mid;
            }
            return 0.5 * (lo + hi);
        }
        lo = hi;
        hi *= 2.0;
    }
    return std::nullopt;
}

struct SideMinimum {
    std::size_t index;
    double value;
};

/// Minimum of |t|^2 strictly on one side of Delta_p = 0; nullopt if it sits on the axis edge.
std::optional<SideMinimum> side_minimum(const Spectrum& s, bool left) {
    std::optional<SideMinimum> best;
    for (std::size_t i = 0; i < s.points.size(); ++i) {
        const double x = s.points[i].Delta_p;
        if (left ? !(x < 0.0) : !(x > 0.0)) continue;
        if (!best || s.points[i].t_sq < best->value) best = SideMinimum{i, s.points[i].t_sq};
    }
    if (!best || best->index == 0 || best->index + 1 == s.points.size()) return std::nullopt;
    return best;
}

double refine_minimum_position(const Spectrum& s, std::size_t i) {
    const double x0 = s.points[i - 1].Delta_p, x1 = s.points[i].Delta_p, x2 = s.points[i + 1].Delta_p;
    const double y0 = s.points[i - 1].t_sq, y1 = s.points[i].t_sq, y2 = s.points[i + 1].t_sq;
    const double d01 = (y1 - y0) / (x1 - x0);
    const double d12 = (y2 - y1) / (x2 - x1);
    const double c2 = (d12 - d01) / (x2 - x0);
    if (!(c2 > 0.0)) return x1;
    const double c1 = d01 - c2 * (x0 + x1);
    return std::clamp(-c1 / (2.0 * c2), x0, x2);
}

}  // namespace

RegimeLabel classify_regime(const Spectrum& s) {
    constexpr double kMargin = 0.05;
    const double need = 3.0 * s.params.kappa_o * (1.0 - 1e-9);
    if (s.axis.empty() || s.axis.front() > -need || s.axis.back() < need) {
        throw CoverageError("classify_regime: spectrum must cover [-3 kappa_o, +3 kappa_o]");
    }

    RegimeLabel out;
    auto& m = out.metrics;
    m.bare_reference = bare_resonance_transmission(s.params);
    m.center_t_sq = s.center.t_sq;
    const auto [peak_x, peak_y] = find_peak_transmission(s);
    m.max_t_sq = peak_y;
    m.Delta_p_at_max = peak_x;
    if (m.center_t_sq > m.max_t_sq) {
        m.max_t_sq = m.center_t_sq;
        m.Delta_p_at_max = 0.0;
    }

    const double bare = m.bare_reference;
    const auto left_min = side_minimum(s, true);
    const auto right_min = side_minimum(s, false);

    // Interior maximum of the window between the two flanking minima.
    auto window_peak = [&]() -> std::optional<std::pair<double, double>> {
        if (!left_min || !right_min) return std::nullopt;
        std::size_t best = left_min->index + 1;
        for (std::size_t i = best; i < right_min->index; ++i) {
            if (s.points[i].t_sq > s.points[best].t_sq) best = i;
        }
        if (best >= right_min->index) return std::nullopt;
        double x = s.points[best].Delta_p, y = s.points[best].t_sq;
        if (s.center.t_sq > y) {
            x = 0.0;
            y = s.center.t_sq;
        }
        return std::pair{x, y};
    };

    if (m.max_t_sq > 1.0) {
        out.label = Regime::amplification;
    } else if (m.center_t_sq < (1.0 - kMargin) * bare) {
        out.label = Regime::eia;
    } else if (m.center_t_sq >= (1.0 + kMargin) * bare && left_min && right_min &&
               left_min->value < (1.0 + kMargin) * bare && right_min->value < (1.0 + kMargin) * bare) {
        const double separation =
            refine_minimum_position(s, right_min->index) - refine_minimum_position(s, left_min->index);
        const auto peak = window_peak();
        if (peak && peak->second > std::max(left_min->value, right_min->value) &&
            std::abs(peak->first) <= 0.25 * separation) {
            out.label = Regime::eit;
            m.dip_separation = separation;
        }
    } else {
        out.label = Regime::bare;
    }

    const double reference = out.label == Regime::bare ? m.max_t_sq : bare;
    const double level = 0.5 * (m.center_t_sq + reference);
    const auto right = level_crossing(s, level, +1.0);
    const auto left = level_crossing(s, level, -1.0);
    if (left && right) m.window_width = *left + *right;
    return out;
}

std::size_t PowerScan::failures() const {
    return static_cast<std::size_t>(
        std::count_if(points.begin(), points.end(), [](const auto& q) { return !q.error.empty(); }));
}

namespace {

struct PowerEval {
    SteadyState steady;
    double t_sq;
    double margin;
};

PowerEval evaluate_power(const SystemParams& p, DriveConfig d, double power, const SweepOptions& o,
                         std::optional<PhotonNumbers> seed) {
    d.P_o = power;
    PowerEval e;
    e.steady = solve_steady_state(p, d, o.solver, seed);
    e.t_sq = std::norm(transmission_coefficient(pump_probe_detuning(0.0, d.Delta_o), p, e.steady));
    e.margin = assess_stability(p, d, e.steady).margin;
    return e;
}

/// Bisects on the sign of `value(eval)` between two scan points.
template <class Value>
double bisect_power(const SystemParams& p, const DriveConfig& d, const SweepOptions& o, double lo, double hi,
                    PhotonNumbers seed, Value value) {
    const bool lo_sign = value(evaluate_power(p, d, lo, o, seed)) > 0.0;
    for (int k = 0; k < 200 && hi - lo > o.threshold_rel_tol * hi; ++k) {
        const double mid = 0.5 * (lo + hi);
        const auto e = evaluate_power(p, d, mid, o, seed);
        if ((value(e) > 0.0) == lo_sign) {
            lo = mid;
            seed = {e.steady.n_o, e.steady.n_e};
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

PowerScan power_sweep(const SystemParams& p, const DriveConfig& d, const std::vector<double>& powers,
                      const SweepOptions& options) {
    if (powers.empty()) throw DomainError("power_sweep: empty power list");
    for (std::size_t i = 1; i < powers.size(); ++i) {
        if (!(powers[i] > powers[i - 1])) throw DomainError("power_sweep: powers must be strictly increasing");
    }

    PowerScan scan;
    std::vector<std::optional<PhotonNumbers>> roots(powers.size());
    std::optional<PhotonNumbers> seed;
    for (std::size_t i = 0; i < powers.size(); ++i) {
        PowerScanPoint pt;
        pt.P_o = powers[i];
        try {
            const auto e = evaluate_power(p, d, powers[i], options, seed);
            pt.t_sq_peak = e.t_sq;
            pt.margin = e.margin;
            pt.stable = e.margin < 0.0;
            pt.multistable = e.steady.multistable;
            pt.residual = e.steady.residual;
            seed = PhotonNumbers{e.steady.n_o, e.steady.n_e};
            roots[i] = seed;
        } catch (const SolverError& err) {
            pt.t_sq_peak = std::numeric_limits<double>::quiet_NaN();
            pt.margin = std::numeric_limits<double>::quiet_NaN();
            pt.error = err.what();
            pt.residual = err.last_residual;
        }
        scan.points.push_back(pt);
    }

    for (std::size_t i = 1; i < scan.points.size(); ++i) {
        if (!roots[i - 1] || !roots[i]) continue;
        const auto& a = scan.points[i - 1];
        const auto& b = scan.points[i];
        if (!scan.threshold_interpolated && (a.t_sq_peak > 1.0) != (b.t_sq_peak > 1.0)) {
            const double frac = (1.0 - a.t_sq_peak) / (b.t_sq_peak - a.t_sq_peak);
            scan.threshold_interpolated = a.P_o + frac * (b.P_o - a.P_o);
            try {
                scan.threshold = bisect_power(p, d, options, a.P_o, b.P_o, *roots[i - 1],
                                              [](const PowerEval& e) { return e.t_sq - 1.0; });
            } catch (const SolverError&) {
            }
        }
        if (!scan.instability_threshold && (a.margin < 0.0) != (b.margin < 0.0)) {
            try {
                scan.instability_threshold = bisect_power(p, d, options, a.P_o, b.P_o, *roots[i - 1],
                                                          [](const PowerEval& e) { return e.margin; });
            } catch (const SolverError&) {
            }
        }
    }
    return scan;
}

}  // namespace hoem
