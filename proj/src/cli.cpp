#include "hybridoem/cli.hpp"

#include "hybridoem/config.hpp"
#include "hybridoem/errors.hpp"
#include "hybridoem/output.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace hoem {

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_path;
    std::string format;
    std::string convention;
    bool quiet{false};
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error reading config file '" + path + "'");
    return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open output file '" + path + "'");
    out << data;
    out.flush();
    if (!out) throw IoError("error writing output file '" + path + "'");
}

/// The subcommand picks the task; the config's task block must be compatible.
void reconcile_task(RunConfig& cfg, Task requested) {
    const bool axis_task = [](Task t) { return t == Task::spectrum || t == Task::classify; }(requested);
    const bool config_axis = cfg.task == Task::spectrum || cfg.task == Task::classify;
    const bool compatible = cfg.task == requested || (axis_task && config_axis) || requested == Task::steady ||
                            requested == Task::delay;
    if (!compatible) {
        throw ValidationError("config task block [" + std::string(to_string(cfg.task)) +
                              "] cannot drive subcommand '" + std::string(to_string(requested)) + "'");
    }
    if (requested != cfg.task) {
        if (!axis_task) cfg.axis = AxisSpec::around_cavity(cfg.system);
        cfg.powers.clear();
        cfg.task = requested;
    }
}

struct Outcome {
    ResultTable table;
    std::vector<std::string> warnings;
    std::string solver_report;  ///< non-empty when some points failed
};

void note_stability(Outcome& o, const StabilityReport& st) {
    if (!st.stable) {
        std::ostringstream os;
        os << "operating point is dynamically unstable (margin " << format_double(st.margin)
           << " rad/s); response values are formal";
        o.warnings.push_back(os.str());
    }
}

Outcome execute(const RunConfig& cfg) {
    SweepOptions sweep;
    sweep.solver = cfg.solver;
    sweep.threads = threads_from_environment();

    Outcome o;
    for (const auto& w : validate_params(cfg.system, cfg.drive).warnings) o.warnings.push_back(w);
    switch (cfg.task) {
        case Task::steady: {
            const auto ss = solve_steady_state(cfg.system, cfg.drive, cfg.solver);
            const auto st = assess_stability(cfg.system, cfg.drive, ss);
            note_stability(o, st);
            if (ss.multistable) o.warnings.emplace_back("photon-number equations are multistable");
            o.table = steady_table(ss, st);
            break;
        }
        case Task::spectrum:
        case Task::classify: {
            const auto s = spectrum_sweep(cfg.system, cfg.drive, cfg.axis, sweep);
            note_stability(o, s.stability);
            if (s.steady.multistable) o.warnings.emplace_back("photon-number equations are multistable");
            o.table = cfg.task == Task::spectrum ? spectrum_table(s) : regime_table(classify_regime(s));
            break;
        }
        case Task::power_sweep: {
            const auto scan = power_sweep(cfg.system, cfg.drive, cfg.powers, sweep);
            std::size_t unstable = 0;
            for (const auto& p : scan.points) {
                if (p.error.empty() && !p.stable) ++unstable;
            }
            if (unstable) {
                o.warnings.push_back(std::to_string(unstable) +
                                     " scan points are dynamically unstable; response values there are formal");
            }
            if (scan.failures()) {
                std::ostringstream os;
                for (const auto& p : scan.points) {
                    if (p.error.empty()) continue;
                    os << "P_o = " << format_double(p.P_o) << " W: " << p.error << " [residual "
                       << format_double(p.residual) << "]\n";
                }
                o.solver_report = os.str();
            }
            o.table = power_scan_table(scan);
            break;
        }
        case Task::delay: {
            const auto ss = solve_steady_state(cfg.system, cfg.drive, cfg.solver);
            const auto st = assess_stability(cfg.system, cfg.drive, ss);
            note_stability(o, st);
            const auto analytic = group_delay(cfg.system, cfg.drive, ss, DelayMethod::analytic);
            const auto fd = group_delay(cfg.system, cfg.drive, ss, DelayMethod::finite_difference);
            o.table = delay_table(analytic, fd);
            break;
        }
    }
    return o;
}

int run(Task task, const CliOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        RunConfig cfg = parse_config(read_file(opt.config_path));
        reconcile_task(cfg, task);
        if (!opt.convention.empty()) {
            const auto c = parse_convention(opt.convention);
            if (!c) throw ValidationError("unknown convention '" + opt.convention + "'");
            cfg.drive.convention = *c;
        }
        if (!opt.format.empty()) {
            const auto f = parse_output_format(opt.format);
            if (!f) throw ValidationError("unknown format '" + opt.format + "'");
            cfg.format = *f;
        }
        if (!opt.out_path.empty()) cfg.output_path = opt.out_path;

        Outcome o = execute(cfg);
        ResultEnvelope env;
        env.config = cfg;
        env.convention = cfg.drive.convention;
        env.payload = std::move(o.table);
        env.warnings = o.warnings;
        const std::string data = emit_results(env, cfg.format);
        if (cfg.output_path) write_file(*cfg.output_path, data);
        else out << data;

        if (!opt.quiet) {
            for (const auto& w : o.warnings) err << "warning: " << w << '\n';
        }
        if (!o.solver_report.empty()) {
            err << "error: steady-state solver failed at some scan points\n" << o.solver_report;
            return kExitSolver;
        }
        return kExitOk;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const ParseError& e) {
        err << "error: " << opt.config_path << (e.line > 0 ? ":" : ": ") << e.what() << '\n';
        return kExitInvalid;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const SolverError& e) {
        err << "error: " << e.what() << " [last n_o = " << format_double(e.last_n_o)
            << ", n_e = " << format_double(e.last_n_e) << "]\n";
        return kExitSolver;
    } catch (const std::runtime_error& e) {
        // singular response, ill-conditioned delay, eigensolver failure
        err << "error: " << e.what() << '\n';
        return kExitSolver;
    }
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Probe response of a hybrid opto-electromechanical system", "hybridoem"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(HYBRIDOEM_VERSION));

    CliOptions opt;
    struct Sub {
        Task task;
        const char* help;
        CLI::App* app;
    };
    std::vector<Sub> subs = {{Task::steady, "Solve the steady state and report its stability", nullptr},
                             {Task::spectrum, "Probe transmission spectrum", nullptr},
                             {Task::power_sweep, "Peak transmission versus optical pump power", nullptr},
                             {Task::delay, "Group delay of the transmitted probe at Delta_p = 0", nullptr},
                             {Task::classify, "Classify the regime (BARE, EIT, EIA, AMPLIFICATION)", nullptr}};
    for (auto& s : subs) {
        s.app = app.add_subcommand(std::string(to_string(s.task)), s.help);
        s.app->add_option("--config", opt.config_path, "Run configuration file")->required();
        s.app->add_option("--out", opt.out_path, "Output file (default: standard output)");
        s.app->add_option("--format", opt.format, "csv or json (overrides the config)");
        s.app->add_option("--convention", opt.convention, "standard or paper-literal (overrides the config)");
        s.app->add_flag("--quiet", opt.quiet, "Suppress warnings");
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << HYBRIDOEM_VERSION << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    }

    for (const auto& s : subs) {
        if (s.app->parsed()) return run(s.task, opt, out, err);
    }
    return kExitInvalid;
}

int run_command(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_command(args, std::cout, std::cerr);
}

}  // namespace hoem
