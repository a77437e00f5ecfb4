#pragma once

#include <stdexcept>
#include <string>

namespace licon {

/// Raised when a caller breaks a documented precondition (sizes, ranges, grids).
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A linear or nonlinear solve could not produce a usable answer.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Newton iterate became non-finite.
class DivergenceError : public SolverError {
public:
    using SolverError::SolverError;
};

/// Malformed input file; carries 1-based line and column.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line, int column)
        : std::runtime_error(what + " (line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ")"),
          line_(line),
          column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

/// Unknown key or invalid value in an experiment configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ContractViolation(message);
}

}  // namespace licon
