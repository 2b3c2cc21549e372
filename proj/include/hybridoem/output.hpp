// output.hpp: result envelopes and their CSV / JSON serialization.
//
// CSV layout: a preamble of '#' lines (software, version, task, convention,
// warnings, summary values, then the canonical config echoed as "# | ..."),
// one mandatory header row, then data rows. Numbers are written as the
// shortest decimal that round-trips; booleans as 1/0. JSON carries the same
// fields, with rows as objects keyed by column name.

#pragma once

#include "hybridoem/config.hpp"
#include "hybridoem/linear_response.hpp"
#include "hybridoem/stability.hpp"
#include "hybridoem/sweeps.hpp"

#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace hoem {

using Cell = std::variant<double, bool, std::string>;

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::pair<std::string, Cell>> summary;
};

struct ResultEnvelope {
    RunConfig config;
    std::string version{HYBRIDOEM_VERSION};
    Convention convention{Convention::standard};
    ResultTable payload;
    std::vector<std::string> warnings;
};

/// Columns: delta_p_rad_s, delta_rad_s, t_re, t_im, t_sq, phase_rad, stable
ResultTable spectrum_table(const Spectrum& s);
/// Columns: P_o_W, t_sq_peak, margin_rad_s
ResultTable power_scan_table(const PowerScan& scan);
ResultTable steady_table(const SteadyState& ss, const StabilityReport& st);
ResultTable delay_table(const DelayResult& analytic, const DelayResult& finite_difference);
ResultTable regime_table(const RegimeLabel& label);

std::string emit_results(const ResultEnvelope& env, OutputFormat format);

/// Parses the JSON produced by emit_results. The config is re-parsed from its
/// echo. Throws ParseError on malformed input.
ResultEnvelope parse_results_json(const std::string& text);

/// Cell equality treating NaN as equal to NaN.
bool same_cells(const Cell& a, const Cell& b);
bool same_tables(const ResultTable& a, const ResultTable& b);

}  // namespace hoem
