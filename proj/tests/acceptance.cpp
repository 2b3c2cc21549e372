// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "hybridoem/config.hpp"
#include "hybridoem/core_model.hpp"
#include "hybridoem/errors.hpp"
#include "hybridoem/linear_response.hpp"
#include "hybridoem/output.hpp"
#include "hybridoem/stability.hpp"
#include "hybridoem/steady_state.hpp"
#include "hybridoem/sweeps.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

using namespace hoem;

namespace {

struct Verdict {
    bool pass{false};
    std::string detail;
};

std::string fmt(double v, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

DriveConfig drive(double P_o, double P_e, double Delta_o, double Delta_e,
                  Convention c = Convention::standard) {
    return DriveConfig{P_o, P_e, 1e-9, Delta_o, Delta_e, c};
}

DriveConfig red_red(const SystemParams& p, double P_o) { return drive(P_o, 1e-6, p.omega_m, p.omega_m); }
DriveConfig blue_red(const SystemParams& p, double P_o) { return drive(P_o, 1e-6, -p.omega_m, p.omega_m); }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// 1. Pumps off: |t(0)|^2 = (1 - kappa_o_ext / kappa_o)^2.
Verdict bare_resonance() {
    const auto p = SystemParams::reference();
    const auto d = drive(0.0, 0.0, p.omega_m, p.omega_m);
    const auto ss = solve_steady_state(p, d);
    const double t_sq = std::norm(probe_transmission(pump_probe_detuning(0.0, d.Delta_o), p, d, ss));
    const double expected = 0.0576;
    const double err = rel(t_sq, expected);
    return {err <= 1e-12, "|t(0)|^2 = " + fmt(t_sq, 17) + ", relative error " + fmt(err, 3)};
}

/// 2. Closed-form a_plus against the 6x6 solve over random stable operating points.
Verdict closed_form_vs_solve() {
    const auto ref = SystemParams::reference();
    std::mt19937_64 rng(20240917);
    std::uniform_real_distribution<double> jitter(0.5, 1.5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);

    int stable_points = 0, attempts = 0, evaluations = 0;
    double worst = 0.0;
    while (stable_points < 1000 && attempts < 20000) {
        ++attempts;
        SystemParams p = ref;
        p.omega_m *= jitter(rng);
        p.kappa_o *= jitter(rng);
        p.kappa_e *= jitter(rng);
        p.kappa_o_ext = p.kappa_o * 0.76 * jitter(rng) / 1.5;
        p.kappa_e_ext = p.kappa_e * 0.11 * jitter(rng);
        p.g_o *= jitter(rng);
        p.g_e *= jitter(rng);
        p.gamma_m *= jitter(rng);
        const double sign_o = coin(rng) ? 1.0 : -1.0;
        const double sign_e = coin(rng) ? 1.0 : -1.0;
        // Red pumps up to a few mW, blue pumps up to tens of uW.
        const double P_o = sign_o > 0 ? 3e-3 * std::pow(unit(rng), 2) : 50e-6 * unit(rng);
        const double P_e = 1e-6 * jitter(rng) * (sign_e > 0 ? 1.0 : 0.1);
        const DriveConfig d = drive(P_o, P_e, sign_o * p.omega_m * jitter(rng), sign_e * p.omega_m * jitter(rng));

        SteadyState ss;
        try {
            ss = solve_steady_state(p, d);
            if (!assess_stability(p, d, ss).stable) continue;
        } catch (const std::exception&) {
            continue;
        }
        ++stable_points;
        for (int k = 0; k < 8; ++k) {
            // Probe detunings spread over the cavity line and both mechanical sidebands.
            const double Delta_p = (unit(rng) * 2.0 - 1.0) * 3.0 * p.kappa_o +
                                   (k % 2 ? 0.0 : (unit(rng) - 0.5) * 100.0 * p.gamma_m);
            const double delta = pump_probe_detuning(Delta_p, d.Delta_o);
            const cplx closed = probe_sideband_amplitude(delta, p, d, ss);
            const cplx solved = fluctuation_linear_solve(delta, p, d, ss).a_plus;
            worst = std::max(worst, std::abs(closed - solved) / std::abs(solved));
            ++evaluations;
        }
    }
    return {stable_points >= 1000 && worst < 1e-10,
            std::to_string(stable_points) + " stable points (" + std::to_string(attempts) + " drawn), " +
                std::to_string(evaluations) + " detunings, worst relative difference " + fmt(worst, 3)};
}

/// 3. Time-domain integration against the fixed point.
Verdict ode_oracle() {
    const auto p = SystemParams::reference();
    struct Case {
        const char* name;
        DriveConfig d;
    };
    const std::vector<Case> cases = {{"red 2 mW", red_red(p, 2e-3)},
                                     {"red 3 mW", red_red(p, 3e-3)},
                                     {"blue 10 uW", blue_red(p, 10e-6)},
                                     {"blue 40 uW", blue_red(p, 40e-6)}};
    bool ok = true;
    std::ostringstream detail;
    for (const auto& c : cases) {
        const auto fp = solve_steady_state(p, c.d);
        const auto ode = mean_field_evolution_oracle(p, c.d);
        const double err = std::max({rel(ode.state.n_o, fp.n_o), rel(ode.state.n_e, fp.n_e), rel(ode.state.Q_s, fp.Q_s)});
        ok = ok && err < 1e-6;
        detail << c.name << ": " << fmt(err, 3) << " (settled at " << fmt(ode.settle_time * 1e3, 3) << " ms); ";
    }
    return {ok, "max relative difference in (n_o, n_e, Q_s): " + detail.str()};
}

/// 4. Red/red transparency window.
Verdict red_window() {
    const auto p = SystemParams::reference();
    bool ok = true;
    std::ostringstream detail;
    double previous_center = -1.0;
    for (const double P_o : {2e-3, 3e-3}) {
        const auto d = red_red(p, P_o);
        const auto s = spectrum_sweep(p, d, AxisSpec::around_cavity(p));
        const auto& pts = s.points;
        const std::size_t mid = pts.size() / 2;

        // Minima on each side of the origin, then the window maximum between them.
        auto lmin = std::min_element(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(mid),
                                     [](const auto& a, const auto& b) { return a.t_sq < b.t_sq; });
        auto rmin = std::min_element(pts.begin() + static_cast<std::ptrdiff_t>(mid) + 1, pts.end(),
                                     [](const auto& a, const auto& b) { return a.t_sq < b.t_sq; });
        auto peak = std::max_element(lmin, rmin + 1, [](const auto& a, const auto& b) { return a.t_sq < b.t_sq; });
        const bool interior = peak != lmin && peak != rmin && lmin != pts.begin() && rmin + 1 != pts.end();
        const double separation = rmin->Delta_p - lmin->Delta_p;
        const bool centered = std::abs(peak->Delta_p) <= 0.05 * separation;
        const double center = s.center.t_sq;
        const bool flanked = lmin->t_sq < center && rmin->t_sq < center && lmin->t_sq < peak->t_sq &&
                             rmin->t_sq < peak->t_sq;
        const auto delay = group_delay(p, d, s.steady, DelayMethod::analytic);
        const bool rising = center > previous_center;
        previous_center = center;

        ok = ok && interior && centered && flanked && center > 0.9 && delay.tau_g > 0.0 && rising;
        detail << fmt(P_o * 1e3, 2) << " mW: |t(0)|^2 = " << fmt(center, 6) << ", window peak at Delta_p = "
               << fmt(peak->Delta_p, 3) << " rad/s (minima " << fmt(separation, 3) << " rad/s apart, "
               << fmt(lmin->t_sq, 4) << " / " << fmt(rmin->t_sq, 4) << "), tau_g = " << fmt(delay.tau_g, 4)
               << " s, label " << to_string(classify_regime(s).label) << "; ";
    }
    return {ok, detail.str() + "|t(0)|^2 increases with P_o"};
}

/// 5. Blue optical / red microwave regimes.
Verdict blue_regimes() {
    const auto p = SystemParams::reference();
    const auto eia = spectrum_sweep(p, blue_red(p, 10e-6), AxisSpec::around_cavity(p));
    const auto amp = spectrum_sweep(p, blue_red(p, 40e-6), AxisSpec::around_cavity(p));
    const auto eia_label = classify_regime(eia);
    const auto amp_label = classify_regime(amp);
    const bool ok = eia.center.t_sq < 0.0576 && eia_label.label == Regime::eia && amp_label.metrics.max_t_sq > 1.0 &&
                    amp_label.label == Regime::amplification;
    return {ok, "10 uW: |t(0)|^2 = " + fmt(eia.center.t_sq) + " -> " + std::string(to_string(eia_label.label)) +
                    "; 40 uW: max |t|^2 = " + fmt(amp_label.metrics.max_t_sq) + " -> " +
                    std::string(to_string(amp_label.label))};
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return v;
}

/// 6. Unity-transmission threshold of the blue optical pump.
Verdict threshold() {
    const auto p = SystemParams::reference();
    const auto standard = power_sweep(p, blue_red(p, 0.0), linspace(0.0, 55e-6, 23));
    const bool standard_ok = standard.threshold && *standard.threshold >= 31e-6 && *standard.threshold <= 43e-6;

    // Same scan under the literal convention, then a scan scaled down to find where it crosses.
    auto literal_drive = blue_red(p, 0.0);
    literal_drive.convention = Convention::paper_literal;
    const auto literal = power_sweep(p, literal_drive, linspace(0.0, 55e-6, 23));
    const auto literal_fine = power_sweep(p, literal_drive, linspace(0.0, 55e-6 / (2.0 * p.kappa_o) * 4.0, 41));
    const auto literal_threshold = literal.threshold ? literal.threshold : literal_fine.threshold;
    const bool literal_off = !literal_threshold || *literal_threshold < 31e-6 / 10.0 || *literal_threshold > 43e-6 * 10.0;

    std::string lit = literal_threshold ? fmt(*literal_threshold * 1e6, 4) + " uW" : std::string("no crossing");
    return {standard_ok && literal_off,
            "standard: " + (standard.threshold ? fmt(*standard.threshold * 1e6, 5) + " uW" : std::string("none")) +
                " (interpolated " +
                (standard.threshold_interpolated ? fmt(*standard.threshold_interpolated * 1e6, 5) : std::string("-")) +
                " uW); paper-literal: " + lit + "; only the standard convention lands in [31, 43] uW"};
}

/// 7. Analytic against finite-difference group delay.
Verdict delay_consistency() {
    const auto p = SystemParams::reference();
    bool ok = true;
    std::ostringstream detail;
    for (const double P_o : {0.0, 2e-3, 3e-3}) {
        const auto d = red_red(p, P_o);
        const auto ss = solve_steady_state(p, d);
        const auto a = group_delay(p, d, ss, DelayMethod::analytic);
        const auto f = group_delay(p, d, ss, DelayMethod::finite_difference);
        const double err = rel(f.tau_g, a.tau_g);
        ok = ok && err < 1e-4;
        detail << fmt(P_o * 1e3, 2) << " mW: " << fmt(a.tau_g, 6) << " s vs " << fmt(f.tau_g, 6) << " s ("
               << fmt(err, 2) << "); ";
    }
    return {ok, detail.str()};
}

/// 8. Eigenvalue verdicts against settle/diverge behaviour of the integration.
Verdict stability_grid() {
    const auto p = SystemParams::reference();
    const std::vector<double> grid_uW = {1,   5,   10,  15,  20,  25,  30,  35,  40,  45,
                                         100, 120, 150, 200, 250, 300, 400, 500, 700, 1000};
    int agree = 0, stable = 0;
    std::ostringstream mismatches;
    for (const double uW : grid_uW) {
        const auto d = blue_red(p, uW * 1e-6);
        const bool eig_stable = assess_stability(p, d, solve_steady_state(p, d)).stable;
        std::string ode_verdict;
        try {
            mean_field_evolution_oracle(p, d);
            ode_verdict = "settled";
        } catch (const InstabilityError&) {
            ode_verdict = "diverged";
        } catch (const TimeoutError&) {
            ode_verdict = "timeout";
        }
        const bool match = (eig_stable && ode_verdict == "settled") || (!eig_stable && ode_verdict == "diverged");
        if (match) ++agree;
        else mismatches << " " << uW << " uW (" << (eig_stable ? "stable" : "unstable") << "/" << ode_verdict << ")";
        if (eig_stable) ++stable;
    }
    const int n = static_cast<int>(grid_uW.size());
    return {agree == n && stable > 0 && stable < n,
            std::to_string(agree) + "/" + std::to_string(n) + " agree (" + std::to_string(stable) + " stable, " +
                std::to_string(n - stable) + " unstable)" + (agree == n ? "" : "; mismatches:" + mismatches.str())};
}

std::string read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// 9. Sweep output files under different thread counts.
Verdict determinism() {
    namespace fs = std::filesystem;
    const auto p = SystemParams::reference();
    const fs::path dir = fs::temp_directory_path() / ("hybridoem_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);

    const auto write_runs = [&](unsigned threads) {
        SweepOptions opts;
        opts.threads = threads;
        std::vector<std::string> names;
        const auto emit = [&](const std::string& name, Task task, const DriveConfig& d, ResultTable table,
                              OutputFormat format) {
            ResultEnvelope env;
            env.config.system = p;
            env.config.drive = d;
            env.config.task = task;
            env.config.format = format;
            env.convention = d.convention;
            env.payload = std::move(table);
            const fs::path path = dir / (name + "_" + std::to_string(threads));
            std::ofstream(path, std::ios::binary) << emit_results(env, format);
            names.push_back(path.string());
        };
        const auto red = red_red(p, 2e-3);
        const auto spec = spectrum_sweep(p, red, AxisSpec::around_cavity(p), opts);
        emit("spectrum.csv", Task::spectrum, red, spectrum_table(spec), OutputFormat::csv);
        emit("spectrum.json", Task::spectrum, red, spectrum_table(spec), OutputFormat::json);
        const auto blue = blue_red(p, 40e-6);
        emit("classify.csv", Task::classify, blue,
             regime_table(classify_regime(spectrum_sweep(p, blue, AxisSpec::around_cavity(p), opts))),
             OutputFormat::csv);
        const auto scan = power_sweep(p, blue_red(p, 0.0), linspace(0.0, 60e-6, 25), opts);
        emit("power.csv", Task::power_sweep, blue_red(p, 0.0), power_scan_table(scan), OutputFormat::csv);
        return names;
    };

    const auto reference = write_runs(1);
    int compared = 0, identical = 0;
    for (const unsigned threads : {2u, 8u, 0u}) {
        const auto other = write_runs(threads);
        for (std::size_t i = 0; i < reference.size(); ++i) {
            ++compared;
            const std::string a = read_all(reference[i]);
            if (!a.empty() && a == read_all(other[i])) ++identical;
        }
    }
    std::error_code ec;
    fs::remove_all(dir, ec);
    return {identical == compared, std::to_string(identical) + "/" + std::to_string(compared) +
                                       " output files byte-identical to the single-threaded run (threads 2, 8, auto)"};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Verdict()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "bare cavity resonance", bare_resonance},
        {2, "closed-form sideband amplitude matches the linear solve", closed_form_vs_solve},
        {3, "time-domain steady state matches the fixed point", ode_oracle},
        {4, "red/red transparency window", red_window},
        {5, "blue/red absorption and amplification", blue_regimes},
        {6, "unity-transmission threshold", threshold},
        {7, "group delay analytic vs finite difference", delay_consistency},
        {8, "stability verdicts match time-domain behaviour", stability_grid},
        {9, "deterministic output across thread counts", determinism},
    };

    int failures = 0;
    const auto start_all = std::chrono::steady_clock::now();
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!v.pass) ++failures;
        std::printf("%s %d %s: %s [%.2f s]\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), secs);
        std::fflush(stdout);
    }
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_all).count();
    std::printf("%d/%zu criteria passed [%.2f s]\n", static_cast<int>(criteria.size()) - failures, criteria.size(),
                total);
    return failures ? 1 : 0;
}
