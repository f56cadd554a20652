#pragma once

#include <stdexcept>
#include <string>

namespace gpls {

/// Failure categories. The CLI maps them onto process exit codes.
enum class ErrorKind {
    domain,    ///< invalid argument or out-of-range input
    format,    ///< malformed file or record
    numerical  ///< non-convergence, corank mismatch, degenerate fit
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error(ErrorKind::format, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

/// The sample is unisolvent: no nonzero polynomial of the space vanishes on it.
class NoVarietyError : public NumericalError {
public:
    explicit NoVarietyError(const std::string& what) : NumericalError(what) {}
};

/// More than one independent polynomial vanishes on the sample.
class AmbiguityError : public NumericalError {
public:
    AmbiguityError(const std::string& what, std::size_t corank) : NumericalError(what), corank_(corank) {}
    std::size_t corank() const noexcept { return corank_; }

private:
    std::size_t corank_;
};

/// Gradient of the level-set polynomial collapsed where it must not.
class DegenerateError : public NumericalError {
public:
    explicit DegenerateError(const std::string& what) : NumericalError(what) {}
};

class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, double residual) : NumericalError(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace gpls
