#include "hybridoem/config.hpp"

#include "hybridoem/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace hoem {

std::string_view to_string(Task t) {
    switch (t) {
        case Task::steady: return "steady";
        case Task::spectrum: return "spectrum";
        case Task::power_sweep: return "power-sweep";
        case Task::delay: return "delay";
        case Task::classify: return "classify";
    }
    return "steady";
}

std::optional<Task> parse_task(std::string_view name) {
    for (Task t : {Task::steady, Task::spectrum, Task::power_sweep, Task::delay, Task::classify}) {
        if (to_string(t) == name) return t;
    }
    return std::nullopt;
}

std::string_view to_string(OutputFormat f) { return f == OutputFormat::json ? "json" : "csv"; }

std::optional<OutputFormat> parse_output_format(std::string_view name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "json") return OutputFormat::json;
    return std::nullopt;
}

bool RunConfig::operator==(const RunConfig& o) const {
    return system == o.system && drive == o.drive && solver.damping == o.solver.damping &&
           solver.tolerance == o.solver.tolerance && solver.max_iterations == o.solver.max_iterations &&
           solver.seed_count == o.solver.seed_count && task == o.task && axis == o.axis && powers == o.powers &&
           output_path == o.output_path && format == o.format;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string_view unquote(std::string_view s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

/// Error inside a value, with the offset of the offending character.
struct ValueError {
    std::string message;
    std::size_t offset;
};

struct Unit {
    std::string_view name;
    int exponent;  ///< decimal SI prefix
};

constexpr std::array<Unit, 6> kRateUnits{{{"Hz", 0}, {"kHz", 3}, {"MHz", 6}, {"GHz", 9}, {"THz", 12},
                                          {"rad/s", 0}}};
constexpr std::array<Unit, 8> kPowerUnits{{{"W", 0}, {"mW", -3}, {"uW", -6}, {"\xC2\xB5W", -6},
                                           {"\xCE\xBCW", -6}, {"nW", -9}, {"pW", -12}, {"kW", 3}}};

/// Decimal value of `digits` (as accepted by from_chars) times 10^shift,
/// rounded once so that "10 uW" is exactly the double nearest 1e-5.
double scaled_decimal(std::string_view digits, int shift) {
    std::string text(digits);
    int exponent = 0;
    if (const auto e = text.find_first_of("eE"); e != std::string::npos) {
        std::from_chars(text.data() + e + 1, text.data() + text.size(), exponent);
        text.resize(e);
    }
    text += 'e' + std::to_string(exponent + shift);
    double v = 0.0;
    std::from_chars(text.data(), text.data() + text.size(), v);
    return v;
}

/// Returns the value or sets `err`.
double quantity(std::string_view raw, std::string_view kind, std::optional<ValueError>& err) {
    std::size_t pos = 0;
    const std::string_view s = raw;
    auto fail = [&](std::string msg, std::size_t at) {
        err = ValueError{std::move(msg), at};
        return 0.0;
    };
    if (s.empty()) return fail("empty value", 0);

    double sign = 1.0;
    if (s[pos] == '-' || s[pos] == '+') {
        sign = s[pos] == '-' ? -1.0 : 1.0;
        ++pos;
    }
    double factor = 1.0;
    for (std::string_view prefix : {"2pi*", "2*pi*", "2\xCF\x80*"}) {
        if (s.substr(pos).starts_with(prefix)) {
            factor = kTwoPi;
            pos += prefix.size();
            break;
        }
    }
    double number = 0.0;
    const char* first = s.data() + pos;
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') return fail("malformed number", pos);
    const auto res = std::from_chars(first, last, number);
    if (res.ec != std::errc{} || res.ptr == first) return fail("malformed number", pos);
    const std::string_view digits(first, static_cast<std::size_t>(res.ptr - first));
    pos = static_cast<std::size_t>(res.ptr - s.data());

    const std::string_view rest = trim(s.substr(pos));
    const std::size_t unit_at = rest.empty() ? pos : static_cast<std::size_t>(rest.data() - s.data());
    int shift = 0;
    if (!rest.empty()) {
        bool found = false;
        auto search = [&](const auto& table) {
            for (const auto& u : table) {
                if (u.name == rest) {
                    shift = u.exponent;
                    found = true;
                }
            }
        };
        if (kind == "rate") search(kRateUnits);
        else if (kind == "power") search(kPowerUnits);
        if (!found) return fail("unknown or misplaced unit '" + std::string(rest) + "'", unit_at);
    }
    if (shift != 0 && std::isfinite(number)) number = scaled_decimal(digits, shift);
    return sign * factor * number;
}

long integer(std::string_view s, std::optional<ValueError>& err) {
    long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        err = ValueError{"malformed integer", 0};
        return 0;
    }
    return v;
}

struct Entry {
    std::string key;
    std::string value;
    int line;
    int key_col;
    int value_col;
};

struct Section {
    std::string name;
    int line{0};
    std::vector<Entry> entries;
};

const std::set<std::string, std::less<>> kTaskSections{"steady", "spectrum", "power-sweep", "delay", "classify"};
const std::set<std::string, std::less<>> kKnownSections{"system", "drive", "solver",   "output",  "steady",
                                                        "spectrum", "power-sweep", "delay", "classify"};

std::vector<Section> tokenize(std::string_view text) {
    std::vector<Section> sections;
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        std::string_view line = text.substr(start, nl == std::string_view::npos ? text.size() - start : nl - start);
        const std::size_t line_start = start;
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') quoted = !quoted;
            if (line[i] == '#' && !quoted) {
                line = line.substr(0, i);
                break;
            }
        }
        const std::string_view body = trim(line);
        if (body.empty()) continue;
        const int col = static_cast<int>(body.data() - text.data() - line_start) + 1;

        if (body.front() == '[') {
            if (body.back() != ']') throw ParseError("unterminated section header", line_no, col);
            const std::string name(trim(body.substr(1, body.size() - 2)));
            if (!kKnownSections.contains(name)) throw ParseError("unknown section [" + name + "]", line_no, col);
            for (const auto& s : sections) {
                if (s.name == name) throw ParseError("duplicate section [" + name + "]", line_no, col);
            }
            sections.push_back({name, line_no, {}});
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no, col);
        if (sections.empty()) throw ParseError("key outside of any section", line_no, col);
        const std::string_view key = trim(body.substr(0, eq));
        const std::string_view value = trim(body.substr(eq + 1));
        if (key.empty()) throw ParseError("missing key", line_no, col);
        const int value_col = value.empty() ? col + static_cast<int>(eq) + 1
                                            : static_cast<int>(value.data() - text.data() - line_start) + 1;
        if (value.empty()) throw ParseError("missing value for '" + std::string(key) + "'", line_no, value_col);
        auto& sec = sections.back();
        for (const auto& e : sec.entries) {
            if (e.key == key) throw ParseError("duplicate key '" + std::string(key) + "'", line_no, col);
        }
        sec.entries.push_back({std::string(key), std::string(value), line_no, col, value_col});
    }
    return sections;
}

/// Consumes the keys of one section and reports anything left over.
class SectionReader {
public:
    explicit SectionReader(const Section& s) : sec_(s) {}

    const Entry* find(std::string_view key) {
        for (const auto& e : sec_.entries) {
            if (e.key == key) {
                used_.insert(e.key);
                return &e;
            }
        }
        return nullptr;
    }

    const Entry& require(std::string_view key) {
        if (const auto* e = find(key)) return *e;
        throw ParseError("missing required key '" + std::string(key) + "' in [" + sec_.name + "]", sec_.line, 1);
    }

    double quantity_of(const Entry& e, std::string_view kind) {
        std::optional<ValueError> err;
        const std::string_view v = unquote(e.value);
        const double x = quantity(v, kind, err);
        if (err) {
            const int shift = v.data() != e.value.data() ? 1 : 0;
            throw ParseError(err->message + " in '" + e.key + "'", e.line,
                             e.value_col + shift + static_cast<int>(err->offset));
        }
        return x;
    }

    double rate(std::string_view key) { return quantity_of(require(key), "rate"); }
    double power(std::string_view key) { return quantity_of(require(key), "power"); }

    long integer_of(const Entry& e) {
        std::optional<ValueError> err;
        const long v = integer(unquote(e.value), err);
        if (err) throw ParseError(err->message + " in '" + e.key + "'", e.line, e.value_col);
        return v;
    }

    std::string text_of(const Entry& e) { return std::string(unquote(e.value)); }

    void finish() const {
        for (const auto& e : sec_.entries) {
            if (!used_.contains(e.key)) {
                throw ParseError("unknown key '" + e.key + "' in [" + sec_.name + "]", e.line, e.key_col);
            }
        }
    }

private:
    const Section& sec_;
    std::set<std::string, std::less<>> used_;
};

std::vector<double> power_list(SectionReader& r, const Entry& e) {
    std::string_view v = trim(e.value);
    int col = e.value_col;
    if (!v.empty() && v.front() == '[') {
        if (v.back() != ']') throw ParseError("unterminated power list", e.line, e.value_col);
        v = v.substr(1, v.size() - 2);
        ++col;
    }
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= v.size()) {
        const auto comma = v.find(',', start);
        const std::string_view item_raw = v.substr(start, comma == std::string_view::npos ? v.size() - start
                                                                                         : comma - start);
        const std::string_view item = trim(item_raw);
        const int item_col = col + static_cast<int>(item.data() - v.data());
        if (item.empty()) throw ParseError("empty entry in power list", e.line, item_col);
        Entry sub{e.key, std::string(item), e.line, e.key_col, item_col};
        out.push_back(r.quantity_of(sub, "power"));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

double parse_quantity(std::string_view text, std::string_view kind) {
    std::optional<ValueError> err;
    const double v = quantity(trim(unquote(trim(text))), kind, err);
    if (err) throw ParseError(err->message, 0, 0);
    return v;
}

RunConfig parse_config(std::string_view text) {
    const auto sections = tokenize(text);
    auto find_section = [&](std::string_view name) -> const Section* {
        for (const auto& s : sections) {
            if (s.name == name) return &s;
        }
        return nullptr;
    };

    RunConfig c;
    const Section* sys = find_section("system");
    if (!sys) throw ParseError("missing system block", 0, 0);
    const Section* drv = find_section("drive");
    if (!drv) throw ParseError("missing drive block", 0, 0);

    {
        SectionReader r(*sys);
        auto& s = c.system;
        s.omega_o = r.rate("omega_o");
        s.omega_e = r.rate("omega_e");
        s.omega_m = r.rate("omega_m");
        s.kappa_o = r.rate("kappa_o");
        s.kappa_e = r.rate("kappa_e");
        s.kappa_o_ext = r.rate("kappa_o_ext");
        s.kappa_e_ext = r.rate("kappa_e_ext");
        s.g_o = r.rate("g_o");
        s.g_e = r.rate("g_e");
        s.gamma_m = r.rate("gamma_m");
        r.finish();
    }
    {
        SectionReader r(*drv);
        auto& d = c.drive;
        d.P_o = r.power("P_o");
        d.P_e = r.power("P_e");
        d.P_p = 1e-9;
        if (const auto* e = r.find("P_p")) d.P_p = r.quantity_of(*e, "power");
        d.Delta_o = r.rate("Delta_o");
        d.Delta_e = r.rate("Delta_e");
        if (const auto* e = r.find("convention")) {
            const auto conv = parse_convention(r.text_of(*e));
            if (!conv) throw ParseError("unknown convention '" + r.text_of(*e) + "'", e->line, e->value_col);
            d.convention = *conv;
        }
        r.finish();
    }
    if (const Section* sol = find_section("solver")) {
        SectionReader r(*sol);
        if (const auto* e = r.find("damping")) c.solver.damping = r.quantity_of(*e, "number");
        if (const auto* e = r.find("tolerance")) c.solver.tolerance = r.quantity_of(*e, "number");
        if (const auto* e = r.find("max_iterations")) c.solver.max_iterations = static_cast<int>(r.integer_of(*e));
        if (const auto* e = r.find("seed_count")) c.solver.seed_count = static_cast<int>(r.integer_of(*e));
        r.finish();
        try {
            c.solver.validate();
        } catch (const DomainError& err) {
            throw ValidationError(err.what());
        }
    }
    if (const Section* out = find_section("output")) {
        SectionReader r(*out);
        if (const auto* e = r.find("path")) c.output_path = r.text_of(*e);
        if (const auto* e = r.find("format")) {
            const auto f = parse_output_format(r.text_of(*e));
            if (!f) throw ParseError("unknown output format '" + r.text_of(*e) + "'", e->line, e->value_col);
            c.format = *f;
        }
        r.finish();
    }

    std::vector<const Section*> tasks;
    for (const auto& s : sections) {
        if (kTaskSections.contains(s.name)) tasks.push_back(&s);
    }
    if (tasks.size() != 1) {
        throw ParseError(tasks.empty() ? "missing task block" : "more than one task block",
                         tasks.empty() ? 0 : tasks[1]->line, tasks.empty() ? 0 : 1);
    }
    const Section& task = *tasks.front();
    c.task = *parse_task(task.name);
    {
        SectionReader r(task);
        c.axis = AxisSpec::around_cavity(c.system);
        if (c.task == Task::spectrum || c.task == Task::classify) {
            if (const auto* e = r.find("delta_p_min")) c.axis.min = r.quantity_of(*e, "rate");
            if (const auto* e = r.find("delta_p_max")) c.axis.max = r.quantity_of(*e, "rate");
            if (const auto* e = r.find("count")) {
                const long n = r.integer_of(*e);
                if (n < 2) throw ValidationError("spectrum count must be at least 2");
                c.axis.count = static_cast<std::size_t>(n);
            }
            if (!(c.axis.max > c.axis.min)) throw ValidationError("delta_p_max must exceed delta_p_min");
        } else if (c.task == Task::power_sweep) {
            if (const auto* e = r.find("powers")) {
                c.powers = power_list(r, *e);
                if (r.find("power_min") || r.find("power_max") || r.find("count")) {
                    throw ParseError("give either 'powers' or 'power_min/power_max/count'", e->line, e->key_col);
                }
            } else {
                const double lo = r.power("power_min");
                const double hi = r.power("power_max");
                const long n = r.integer_of(r.require("count"));
                if (n < 1) throw ValidationError("power-sweep count must be at least 1");
                c.powers = AxisSpec{lo, hi, static_cast<std::size_t>(n)}.values();
            }
            if (c.powers.empty()) throw ValidationError("power list is empty");
            for (std::size_t i = 0; i < c.powers.size(); ++i) {
                if (!(c.powers[i] >= 0.0)) throw ValidationError("powers must be nonnegative");
                if (i > 0 && !(c.powers[i] > c.powers[i - 1])) {
                    throw ValidationError("powers must be strictly increasing");
                }
            }
        }
        r.finish();
    }

    require_valid(c.system, c.drive);
    return c;
}

std::string to_config_text(const RunConfig& c) {
    std::ostringstream os;
    auto kv = [&os](std::string_view k, const std::string& v) { os << k << " = " << v << '\n'; };
    auto num = [&](std::string_view k, double v) { kv(k, format_double(v)); };
    const auto& s = c.system;
    os << "[system]\n";
    num("omega_o", s.omega_o);
    num("omega_e", s.omega_e);
    num("omega_m", s.omega_m);
    num("kappa_o", s.kappa_o);
    num("kappa_e", s.kappa_e);
    num("kappa_o_ext", s.kappa_o_ext);
    num("kappa_e_ext", s.kappa_e_ext);
    num("g_o", s.g_o);
    num("g_e", s.g_e);
    num("gamma_m", s.gamma_m);
    const auto& d = c.drive;
    os << "\n[drive]\n";
    num("P_o", d.P_o);
    num("P_e", d.P_e);
    num("P_p", d.P_p);
    num("Delta_o", d.Delta_o);
    num("Delta_e", d.Delta_e);
    kv("convention", std::string(to_string(d.convention)));
    os << "\n[solver]\n";
    num("damping", c.solver.damping);
    num("tolerance", c.solver.tolerance);
    kv("max_iterations", std::to_string(c.solver.max_iterations));
    kv("seed_count", std::to_string(c.solver.seed_count));
    os << "\n[" << to_string(c.task) << "]\n";
    if (c.task == Task::spectrum || c.task == Task::classify) {
        num("delta_p_min", c.axis.min);
        num("delta_p_max", c.axis.max);
        kv("count", std::to_string(c.axis.count));
    } else if (c.task == Task::power_sweep) {
        std::string list;
        for (std::size_t i = 0; i < c.powers.size(); ++i) {
            if (i) list += ", ";
            list += format_double(c.powers[i]);
        }
        kv("powers", list);
    }
    os << "\n[output]\n";
    if (c.output_path) kv("path", "\"" + *c.output_path + "\"");
    kv("format", std::string(to_string(c.format)));
    return os.str();
}

}  // namespace hoem
