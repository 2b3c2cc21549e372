// errors.hpp: exception types shared by the solver, response and I/O layers.

#pragma once

#include <stdexcept>
#include <string>

namespace hoem {

/// Argument outside the mathematical domain of an operation (nonpositive rate, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Parameter set violates a model invariant.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Nonlinear solve did not converge. Carries the last iterate.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double n_o, double n_e, double residual)
        : std::runtime_error(what), last_n_o(n_o), last_n_e(n_e), last_residual(residual) {}

    double last_n_o;
    double last_n_e;
    double last_residual;
};

/// Stored steady state is not self-consistent.
class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Response denominator or fluctuation system is singular at `delta`.
class SingularityError : public std::runtime_error {
public:
    SingularityError(const std::string& what, double delta_rad_s)
        : std::runtime_error(what), delta(delta_rad_s) {}

    double delta;
};

/// Transmission passes too close to zero inside the differentiation stencil.
class IllConditionedDelayError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Eigenvalue or other dense linear-algebra failure.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Time-domain trajectory grew without bound.
class InstabilityError : public std::runtime_error {
public:
    InstabilityError(const std::string& what, double t) : std::runtime_error(what), time(t) {}

    double time;
};

/// Time-domain trajectory did not settle before the integration horizon.
class TimeoutError : public std::runtime_error {
public:
    TimeoutError(const std::string& what, double spread) : std::runtime_error(what), last_spread(spread) {}

    double last_spread;
};

/// Spectrum axis does not cover the range an analysis needs.
class CoverageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed configuration text. Line and column are 1-based; 0 means "whole input".
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line_no, int column_no)
        : std::runtime_error(format(what, line_no, column_no)), line(line_no), column(column_no) {}

    int line;
    int column;

private:
    static std::string format(const std::string& what, int l, int c) {
        if (l <= 0) return what;
        return std::to_string(l) + ":" + std::to_string(c) + ": " + what;
    }
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hoem
