#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace thermoflux {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a closed-form expression.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed text input (mesh files, configs, expressions).
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

/// Structurally well-formed input that violates a documented invariant.
class InvariantError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class AssemblyError : public Error {
public:
    using Error::Error;
};

/// Right side of a singular (pure Neumann) system not orthogonal to constants.
class CompatibilityError : public Error {
public:
    using Error::Error;
};

/// Iterative method failed; carries the residual history for diagnosis.
class SolverError : public Error {
public:
    SolverError(const std::string& what, std::vector<double> history)
        : Error(what), history_(std::move(history)) {}

    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

} // namespace thermoflux
