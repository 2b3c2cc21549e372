#include "hybridoem/steady_state.hpp"

#include "hybridoem/errors.hpp"

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace hoem {

void SolverOptions::validate() const {
    if (!(damping > 0.0 && damping <= 1.0)) throw DomainError("solver damping must lie in (0, 1]");
    if (!(tolerance > 0.0)) throw DomainError("solver tolerance must be positive");
    if (max_iterations < 1) throw DomainError("solver max_iterations must be at least 1");
    if (seed_count < 1) throw DomainError("solver seed_count must be at least 1");
}

namespace {

/// The two photon-number equations depend on (n_o, n_e) only through
/// S = g_o n_o + g_e n_e, which gives an exact scalar reduction for the
/// bracketed fallback.
struct ReducedMap {
    double A_o, A_e;  // kappa_ext E^2
    double c_o, c_e;  // 2 g / omega_m
    double kappa_o, kappa_e;
    double Delta_o, Delta_e;
    double g_o, g_e;

    ReducedMap(const SystemParams& p, const DriveConfig& d) {
        const auto E = drive_amplitudes(p, d);
        A_o = p.kappa_o_ext * E.E_o * E.E_o;
        A_e = p.kappa_e_ext * E.E_e * E.E_e;
        c_o = 2.0 * p.g_o / p.omega_m;
        c_e = 2.0 * p.g_e / p.omega_m;
        kappa_o = p.kappa_o;
        kappa_e = p.kappa_e;
        Delta_o = d.Delta_o;
        Delta_e = d.Delta_e;
        g_o = p.g_o;
        g_e = p.g_e;
    }

    double F_o(double S) const {
        const double w = Delta_o - c_o * S;
        return A_o / (kappa_o * kappa_o + w * w);
    }
    double F_e(double S) const {
        const double w = Delta_e - c_e * S;
        return A_e / (kappa_e * kappa_e + w * w);
    }
    double dF_o(double S) const {
        const double w = Delta_o - c_o * S;
        const double den = kappa_o * kappa_o + w * w;
        return 2.0 * A_o * w * c_o / (den * den);
    }
    double dF_e(double S) const {
        const double w = Delta_e - c_e * S;
        const double den = kappa_e * kappa_e + w * w;
        return 2.0 * A_e * w * c_e / (den * den);
    }
    double G(double S) const { return S - g_o * F_o(S) - g_e * F_e(S); }
    double dG(double S) const { return 1.0 - g_o * dF_o(S) - g_e * dF_e(S); }

    /// Upper bound on S: each Lorentzian is maximal on resonance.
    double S_max() const { return g_o * A_o / (kappa_o * kappa_o) + g_e * A_e / (kappa_e * kappa_e); }
};

struct SeedOutcome {
    bool converged{false};
    PhotonNumbers n{};
    double residual{std::numeric_limits<double>::infinity()};
    int iterations{0};
};

bool finite(PhotonNumbers n) { return std::isfinite(n.n_o) && std::isfinite(n.n_e); }

double rel_diff(double x, double y) { return std::abs(x - y) / std::max({std::abs(x), std::abs(y), 1.0}); }

bool same_root(PhotonNumbers x, PhotonNumbers y, double tol) {
    return rel_diff(x.n_o, y.n_o) <= 1e3 * tol && rel_diff(x.n_e, y.n_e) <= 1e3 * tol;
}

SeedOutcome newton_fallback(const SystemParams& p, const DriveConfig& d, const SolverOptions& opts,
                            PhotonNumbers start, int budget, SeedOutcome out) {
    if (budget <= 0) return out;
    const ReducedMap m(p, d);
    const double s_max = m.S_max();
    double s0 = finite(start) ? m.g_o * start.n_o + m.g_e * start.n_e : 0.0;
    s0 = std::clamp(s0, 0.0, s_max);

    // G(0) <= 0 and G(S_max) >= 0, so a sign change is always reachable.
    double lo = s0, hi = s0;
    const double g0 = m.G(s0);
    if (g0 == 0.0) {
        lo = hi = s0;
    } else {
        double step = std::max({s0 * 1e-3, s_max * 1e-9, std::numeric_limits<double>::min()});
        if (g0 < 0.0) {
            for (hi = std::min(s0 + step, s_max); m.G(hi) < 0.0 && hi < s_max; hi = std::min(s0 + step, s_max)) {
                lo = hi;
                step *= 2.0;
            }
        } else {
            for (lo = std::max(s0 - step, 0.0); m.G(lo) > 0.0 && lo > 0.0; lo = std::max(s0 - step, 0.0)) {
                hi = lo;
                step *= 2.0;
            }
        }
    }

    double root = lo;
    int used = 0;
    if (hi > lo) {
        std::uintmax_t iters = static_cast<std::uintmax_t>(budget);
        auto fn = [&m](double s) { return std::make_pair(m.G(s), m.dG(s)); };
        root = boost::math::tools::newton_raphson_iterate(fn, std::clamp(s0, lo, hi), lo, hi,
                                                          std::numeric_limits<double>::digits - 2, iters);
        used = static_cast<int>(iters);
    }
    PhotonNumbers n{m.F_o(root), m.F_e(root)};
    out.iterations += std::max(used, 1);
    out.n = n;
    out.residual = photon_number_residual(p, d, n);
    out.converged = out.residual <= opts.tolerance;
    return out;
}

SeedOutcome solve_from_seed(const SystemParams& p, const DriveConfig& d, const SolverOptions& opts,
                            PhotonNumbers seed) {
    constexpr int kProgressWindow = 64;
    SeedOutcome out;
    PhotonNumbers n = seed;
    double res = photon_number_residual(p, d, n);
    double checkpoint = res;
    int it = 0;
    const double alpha = opts.damping;
    while (it < opts.max_iterations && res > opts.tolerance) {
        const auto f = photon_number_map(p, d, n);
        n = {(1.0 - alpha) * n.n_o + alpha * f.n_o, (1.0 - alpha) * n.n_e + alpha * f.n_e};
        ++it;
        if (!finite(n)) break;
        res = photon_number_residual(p, d, n);
        if (it % kProgressWindow == 0) {
            if (res > 0.25 * checkpoint) break;  // stalled or cycling
            checkpoint = res;
        }
    }
    out.iterations = it;
    out.n = n;
    out.residual = res;
    if (finite(n) && res <= opts.tolerance) {
        out.converged = true;
        return out;
    }
    return newton_fallback(p, d, opts, n, opts.max_iterations - it, out);
}

}  // namespace

PhotonNumbers photon_number_map(const SystemParams& p, const DriveConfig& d, PhotonNumbers n) {
    const ReducedMap m(p, d);
    const double S = m.g_o * n.n_o + m.g_e * n.n_e;
    return {m.F_o(S), m.F_e(S)};
}

double photon_number_residual(const SystemParams& p, const DriveConfig& d, PhotonNumbers n) {
    const auto f = photon_number_map(p, d, n);
    const double r_o = std::abs(n.n_o - f.n_o) / std::max(std::abs(n.n_o), 1.0);
    const double r_e = std::abs(n.n_e - f.n_e) / std::max(std::abs(n.n_e), 1.0);
    return std::max(r_o, r_e);
}

FixedPointResult photon_number_fixed_point(const SystemParams& p, const DriveConfig& d, const SolverOptions& opts,
                                           std::optional<PhotonNumbers> continuation) {
    opts.validate();
    const ReducedMap m(p, d);

    std::vector<PhotonNumbers> seeds;
    if (continuation) seeds.push_back(*continuation);
    seeds.push_back({0.0, 0.0});
    seeds.push_back({m.A_o / (p.kappa_o * p.kappa_o), m.A_e / (p.kappa_e * p.kappa_e)});
    if (seeds.size() > static_cast<std::size_t>(opts.seed_count)) seeds.resize(opts.seed_count);

    FixedPointResult result;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        auto o = solve_from_seed(p, d, opts, seeds[i]);
        if (o.converged) {
            // One final map application; exact when the mechanics is decoupled.
            o.n = photon_number_map(p, d, o.n);
            o.residual = photon_number_residual(p, d, o.n);
        }
        if (i == 0) {
            if (!o.converged) {
                std::ostringstream os;
                os << "photon-number fixed point did not converge after " << o.iterations
                   << " iterations (residual " << o.residual << ")";
                throw SolverError(os.str(), o.n.n_o, o.n.n_e, o.residual);
            }
            result.n_o = o.n.n_o;
            result.n_e = o.n.n_e;
            result.residual = o.residual;
            result.iterations = o.iterations;
            result.roots.push_back(o.n);
            continue;
        }
        if (!o.converged) continue;
        const bool known = std::any_of(result.roots.begin(), result.roots.end(),
                                       [&](const PhotonNumbers& r) { return same_root(r, o.n, opts.tolerance); });
        if (!known) result.roots.push_back(o.n);
    }
    result.multistable = result.roots.size() > 1;
    return result;
}

SteadyState steady_state_fields(const SystemParams& p, const DriveConfig& d, double n_o, double n_e) {
    const auto E = drive_amplitudes(p, d);
    SteadyState s;
    s.n_o = n_o;
    s.n_e = n_e;
    s.Q_s = (2.0 / p.omega_m) * (p.g_o * n_o + p.g_e * n_e);
    s.Delta_o_eff = d.Delta_o - p.g_o * s.Q_s;
    s.Delta_e_eff = d.Delta_e - p.g_e * s.Q_s;
    s.a_s = std::sqrt(p.kappa_o_ext) * E.E_o / cplx(p.kappa_o, s.Delta_o_eff);
    s.b_s = std::sqrt(p.kappa_e_ext) * E.E_e / cplx(p.kappa_e, s.Delta_e_eff);
    s.residual = photon_number_residual(p, d, {n_o, n_e});

    const double dev_o = std::abs(std::norm(s.a_s) - n_o) / std::max(n_o, 1.0);
    const double dev_e = std::abs(std::norm(s.b_s) - n_e) / std::max(n_e, 1.0);
    if (dev_o > 1e-6 || dev_e > 1e-6) {
        std::ostringstream os;
        os << "steady state inconsistent with photon numbers (relative deviation " << std::max(dev_o, dev_e)
           << ")";
        throw ConsistencyError(os.str());
    }
    return s;
}

SteadyState solve_steady_state(const SystemParams& p, const DriveConfig& d, const SolverOptions& opts,
                               std::optional<PhotonNumbers> continuation) {
    require_valid(p, d);
    const auto fp = photon_number_fixed_point(p, d, opts, continuation);
    auto s = steady_state_fields(p, d, fp.n_o, fp.n_e);
    s.multistable = fp.multistable;
    return s;
}

// ---------------------------------------------------------------------------
// Mean-field time-domain integration
// ---------------------------------------------------------------------------

namespace {

using OdeState = std::array<double, 6>;  // Re a, Im a, Re b, Im b, Q, (dQ/dt) / omega_m

struct MeanFieldRhs {
    double kappa_o, kappa_e, Delta_o, Delta_e, g_o, g_e, omega_m, gamma_m;
    double drive_o, drive_e;  // sqrt(kappa_ext) E

    void operator()(const OdeState& x, OdeState& dx, double /*t*/) const {
        const double Q = x[4];
        const double w_o = Delta_o - g_o * Q;
        const double w_e = Delta_e - g_e * Q;
        dx[0] = w_o * x[1] - kappa_o * x[0] + drive_o;
        dx[1] = -w_o * x[0] - kappa_o * x[1];
        dx[2] = w_e * x[3] - kappa_e * x[2] + drive_e;
        dx[3] = -w_e * x[2] - kappa_e * x[3];
        const double n_o = x[0] * x[0] + x[1] * x[1];
        const double n_e = x[2] * x[2] + x[3] * x[3];
        dx[4] = omega_m * x[5];
        dx[5] = -gamma_m * x[5] - omega_m * Q + 2.0 * (g_o * n_o + g_e * n_e);
    }
};

struct Window {
    double lo[3];
    double hi[3];
    double sum[3];
    int count{0};

    Window() { reset(); }
    void reset() {
        for (int k = 0; k < 3; ++k) {
            lo[k] = std::numeric_limits<double>::infinity();
            hi[k] = -std::numeric_limits<double>::infinity();
            sum[k] = 0.0;
        }
        count = 0;
    }
    void add(const double v[3]) {
        for (int k = 0; k < 3; ++k) {
            lo[k] = std::min(lo[k], v[k]);
            hi[k] = std::max(hi[k], v[k]);
            sum[k] += v[k];
        }
        ++count;
    }
    double spread(int k) const { return hi[k] - lo[k]; }
    double relative_spread(int k) const {
        const double scale = std::abs(sum[k] / count);
        const double s = spread(k);
        if (s == 0.0) return 0.0;
        return s / std::max(scale, 1e-300);
    }
};

}  // namespace

MeanFieldOutcome mean_field_evolution_oracle(const SystemParams& p, const DriveConfig& d,
                                             const MeanFieldOptions& opts) {
    namespace ode = boost::numeric::odeint;
    require_valid(p, d);
    if (!(opts.max_time > 0.0) || !(opts.initial_step > 0.0) || opts.samples_per_period < 2 ||
        opts.steps_per_period_min < 1) {
        throw DomainError("mean_field_evolution_oracle: invalid integration options");
    }
    const auto E = drive_amplitudes(p, d);
    const MeanFieldRhs rhs{p.kappa_o, p.kappa_e, d.Delta_o, d.Delta_e, p.g_o, p.g_e, p.omega_m, p.gamma_m,
                           std::sqrt(p.kappa_o_ext) * E.E_o, std::sqrt(p.kappa_e_ext) * E.E_e};

    const double period = kTwoPi / p.omega_m;
    auto stepper = ode::make_dense_output(opts.abs_tol, opts.rel_tol, period / opts.steps_per_period_min,
                                          ode::runge_kutta_dopri5<OdeState>());
    OdeState x{};
    stepper.initialize(x, 0.0, opts.initial_step);

    const double sample_dt = period / opts.samples_per_period;
    long sample = 0;
    long period_index = 0;
    double reference_q_spread = 0.0;
    Window window;
    MeanFieldOutcome out;
    double last_spread = std::numeric_limits<double>::infinity();

    while (stepper.current_time() < opts.max_time) {
        stepper.do_step(rhs);
        ++out.steps;
        while (static_cast<double>(sample + 1) * sample_dt <= stepper.current_time()) {
            ++sample;
            const double t = static_cast<double>(sample) * sample_dt;
            stepper.calc_state(t, x);
            const double obs[3] = {x[0] * x[0] + x[1] * x[1], x[2] * x[2] + x[3] * x[3], x[4]};
            if (!std::isfinite(obs[0]) || !std::isfinite(obs[1]) || !std::isfinite(obs[2])) {
                throw InstabilityError("mean-field trajectory became non-finite", t);
            }
            window.add(obs);
            if (window.count < opts.samples_per_period) continue;

            ++period_index;
            const double q_spread = window.spread(2);
            if (period_index <= opts.reference_periods) {
                reference_q_spread = std::max(reference_q_spread, q_spread);
            } else if (reference_q_spread > 0.0 && q_spread > opts.divergence_growth * reference_q_spread) {
                std::ostringstream os;
                os << "mean-field trajectory diverges: displacement oscillation grew by more than "
                   << opts.divergence_growth << "x";
                throw InstabilityError(os.str(), t);
            }
            last_spread = std::max({window.relative_spread(0), window.relative_spread(1), window.relative_spread(2)});
            window.reset();
            if (last_spread <= opts.settle_tolerance) {
                SteadyState& s = out.state;
                s.a_s = cplx(x[0], x[1]);
                s.b_s = cplx(x[2], x[3]);
                s.n_o = std::norm(s.a_s);
                s.n_e = std::norm(s.b_s);
                s.Q_s = x[4];
                s.Delta_o_eff = d.Delta_o - p.g_o * s.Q_s;
                s.Delta_e_eff = d.Delta_e - p.g_e * s.Q_s;
                s.residual = last_spread;
                out.settle_time = t;
                out.final_spread = last_spread;
                return out;
            }
        }
    }
    std::ostringstream os;
    os << "mean-field trajectory did not settle within " << opts.max_time << " s (relative spread "
       << last_spread << ")";
    throw TimeoutError(os.str(), last_spread);
}

}  // namespace hoem
