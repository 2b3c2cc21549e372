// config.hpp: the sectioned key-value run configuration.
//
//   [system]     omega_o omega_e omega_m kappa_o kappa_e kappa_o_ext kappa_e_ext g_o g_e gamma_m
//   [drive]      P_o P_e Delta_o Delta_e (required), P_p (default 1 nW), convention
//   [solver]     damping tolerance max_iterations seed_count              (optional)
//   [output]     path format                                              (optional)
//   one task block: [steady] | [spectrum] | [power-sweep] | [delay] | [classify]
//
// Quantities are "[-][2pi*]<number> [unit]". The unit is a pure SI multiplier
// (Hz kHz MHz GHz THz for rates, W mW uW nW pW for powers) and "2pi*"
// multiplies by 2 pi, so "2pi*5.6 MHz" is 2 pi x 5.6e6 rad/s. A bare number is
// taken in rad/s or W.

#pragma once

#include "hybridoem/core_model.hpp"
#include "hybridoem/steady_state.hpp"
#include "hybridoem/sweeps.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hoem {

enum class Task { steady, spectrum, power_sweep, delay, classify };
enum class OutputFormat { csv, json };

std::string_view to_string(Task t);
std::optional<Task> parse_task(std::string_view name);
std::string_view to_string(OutputFormat f);
std::optional<OutputFormat> parse_output_format(std::string_view name);

struct RunConfig {
    SystemParams system{};
    DriveConfig drive{};
    SolverOptions solver{};
    Task task{Task::steady};
    AxisSpec axis{};            ///< spectrum / classify
    std::vector<double> powers; ///< power-sweep, W
    std::optional<std::string> output_path;
    OutputFormat format{OutputFormat::csv};

    bool operator==(const RunConfig& o) const;
};

/// Parses and validates. Throws ParseError (with line/column) for syntax,
/// unknown or missing keys, and ValidationError for invariant violations.
RunConfig parse_config(std::string_view text);

/// Quantity parser used by parse_config; exposed for tests. `kind` is
/// "rate", "power" or "number".
double parse_quantity(std::string_view text, std::string_view kind);

/// Canonical text form in base units. parse_config(to_config_text(c)) == c.
std::string to_config_text(const RunConfig& c);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

}  // namespace hoem
