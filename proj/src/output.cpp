#include "hybridoem/output.hpp"

#include "hybridoem/errors.hpp"

#include "json.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace hoem {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string csv_cell(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
    if (const auto* b = std::get_if<bool>(&c)) return *b ? "1" : "0";
    const auto& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + "\"";
}

nlohmann::ordered_json json_cell(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) {
        if (!std::isfinite(*d)) return nullptr;
        return *d;
    }
    if (const auto* b = std::get_if<bool>(&c)) return *b;
    return std::get<std::string>(c);
}

Cell cell_from_json(const nlohmann::ordered_json& j) {
    if (j.is_null()) return kNaN;
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    throw ParseError("unsupported JSON cell type", 0, 0);
}

std::string single_line(std::string s) {
    for (char& c : s) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

}  // namespace

ResultTable spectrum_table(const Spectrum& s) {
    ResultTable t;
    t.columns = {"delta_p_rad_s", "delta_rad_s", "t_re", "t_im", "t_sq", "phase_rad", "stable"};
    t.rows.reserve(s.points.size());
    for (const auto& p : s.points) {
        t.rows.push_back({p.Delta_p, p.delta, p.t.real(), p.t.imag(), p.t_sq, p.phase, p.stable});
    }
    t.summary = {{"n_o", s.steady.n_o},
                 {"n_e", s.steady.n_e},
                 {"Q_s", s.steady.Q_s},
                 {"stability_margin_rad_s", s.stability.margin},
                 {"multistable", s.steady.multistable},
                 {"center_t_sq", s.center.t_sq},
                 {"phase_jumps", static_cast<double>(s.phase_jumps.size())}};
    return t;
}

ResultTable power_scan_table(const PowerScan& scan) {
    ResultTable t;
    t.columns = {"P_o_W", "t_sq_peak", "margin_rad_s"};
    for (const auto& p : scan.points) t.rows.push_back({p.P_o, p.t_sq_peak, p.margin});
    t.summary = {{"threshold_W", scan.threshold.value_or(kNaN)},
                 {"threshold_interpolated_W", scan.threshold_interpolated.value_or(kNaN)},
                 {"instability_threshold_W", scan.instability_threshold.value_or(kNaN)},
                 {"failed_points", static_cast<double>(scan.failures())}};
    return t;
}

ResultTable steady_table(const SteadyState& ss, const StabilityReport& st) {
    ResultTable t;
    t.columns = {"n_o",         "n_e",         "Q_s",        "a_s_re",       "a_s_im",
                 "b_s_re",      "b_s_im",      "Delta_o_eff_rad_s", "Delta_e_eff_rad_s", "residual",
                 "multistable", "margin_rad_s", "stable"};
    t.rows.push_back({ss.n_o, ss.n_e, ss.Q_s, ss.a_s.real(), ss.a_s.imag(), ss.b_s.real(), ss.b_s.imag(),
                      ss.Delta_o_eff, ss.Delta_e_eff, ss.residual, ss.multistable, st.margin, st.stable});
    return t;
}

ResultTable delay_table(const DelayResult& analytic, const DelayResult& finite_difference) {
    ResultTable t;
    t.columns = {"method", "tau_g_s", "step_rad_s", "richardson_error_s"};
    t.rows.push_back({std::string("analytic"), analytic.tau_g, analytic.step, analytic.richardson_error});
    t.rows.push_back({std::string("finite-difference"), finite_difference.tau_g, finite_difference.step,
                      finite_difference.richardson_error});
    const double rel = std::abs(analytic.tau_g - finite_difference.tau_g) /
                       std::max(std::abs(analytic.tau_g), std::numeric_limits<double>::min());
    t.summary = {{"relative_difference", rel}};
    return t;
}

ResultTable regime_table(const RegimeLabel& label) {
    const auto& m = label.metrics;
    ResultTable t;
    t.columns = {"label",          "t_sq_center", "t_sq_bare", "t_sq_max", "delta_p_at_max_rad_s",
                 "window_width_rad_s", "dip_separation_rad_s"};
    t.rows.push_back({std::string(to_string(label.label)), m.center_t_sq, m.bare_reference, m.max_t_sq,
                      m.Delta_p_at_max, m.window_width.value_or(kNaN), m.dip_separation.value_or(kNaN)});
    return t;
}

std::string emit_results(const ResultEnvelope& env, OutputFormat format) {
    const std::string config_text = to_config_text(env.config);
    if (format == OutputFormat::json) {
        nlohmann::ordered_json j;
        j["software"] = "hybridoem";
        j["version"] = env.version;
        j["task"] = std::string(to_string(env.config.task));
        j["convention"] = std::string(to_string(env.convention));
        j["config"] = config_text;
        j["warnings"] = env.warnings;
        auto summary = nlohmann::ordered_json::object();
        for (const auto& [k, v] : env.payload.summary) summary[k] = json_cell(v);
        j["summary"] = summary;
        j["columns"] = env.payload.columns;
        auto rows = nlohmann::ordered_json::array();
        for (const auto& r : env.payload.rows) {
            auto row = nlohmann::ordered_json::object();
            for (std::size_t i = 0; i < r.size(); ++i) row[env.payload.columns.at(i)] = json_cell(r[i]);
            rows.push_back(std::move(row));
        }
        j["rows"] = std::move(rows);
        return j.dump(2) + "\n";
    }

    std::ostringstream os;
    os << "# hybridoem " << env.version << '\n';
    os << "# task: " << to_string(env.config.task) << '\n';
    os << "# convention: " << to_string(env.convention) << '\n';
    for (const auto& w : env.warnings) os << "# warning: " << single_line(w) << '\n';
    for (const auto& [k, v] : env.payload.summary) os << "# summary: " << k << " = " << csv_cell(v) << '\n';
    os << "# config:\n";
    std::istringstream cfg(config_text);
    for (std::string line; std::getline(cfg, line);) os << (line.empty() ? "# |" : "# | ") << line << '\n';
    for (std::size_t i = 0; i < env.payload.columns.size(); ++i) {
        os << (i ? "," : "") << env.payload.columns[i];
    }
    os << '\n';
    for (const auto& r : env.payload.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_cell(r[i]);
        os << '\n';
    }
    return os.str();
}

ResultEnvelope parse_results_json(const std::string& text) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed result JSON: ") + e.what(), 0, 0);
    }
    try {
        ResultEnvelope env;
        env.version = j.at("version").get<std::string>();
        const auto conv = parse_convention(j.at("convention").get<std::string>());
        if (!conv) throw ParseError("unknown convention in result JSON", 0, 0);
        env.convention = *conv;
        env.config = parse_config(j.at("config").get<std::string>());
        env.warnings = j.at("warnings").get<std::vector<std::string>>();
        for (const auto& [k, v] : j.at("summary").items()) env.payload.summary.emplace_back(k, cell_from_json(v));
        env.payload.columns = j.at("columns").get<std::vector<std::string>>();
        for (const auto& row : j.at("rows")) {
            std::vector<Cell> cells;
            for (const auto& col : env.payload.columns) cells.push_back(cell_from_json(row.at(col)));
            env.payload.rows.push_back(std::move(cells));
        }
        return env;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("result JSON missing field: ") + e.what(), 0, 0);
    }
}

bool same_cells(const Cell& a, const Cell& b) {
    if (a.index() != b.index()) return false;
    if (const auto* x = std::get_if<double>(&a)) {
        const double y = std::get<double>(b);
        return (std::isnan(*x) && std::isnan(y)) || *x == y;
    }
    return a == b;
}

bool same_tables(const ResultTable& a, const ResultTable& b) {
    if (a.columns != b.columns || a.rows.size() != b.rows.size() || a.summary.size() != b.summary.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        if (a.rows[i].size() != b.rows[i].size()) return false;
        for (std::size_t k = 0; k < a.rows[i].size(); ++k) {
            if (!same_cells(a.rows[i][k], b.rows[i][k])) return false;
        }
    }
    for (std::size_t i = 0; i < a.summary.size(); ++i) {
        if (a.summary[i].first != b.summary[i].first || !same_cells(a.summary[i].second, b.summary[i].second)) {
            return false;
        }
    }
    return true;
}

}  // namespace hoem
