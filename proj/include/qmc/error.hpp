#pragma once

#include <stdexcept>
#include <string>

namespace qmc {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid argument value (non-finite input, out-of-range parameter, empty set).
class DomainError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

// Matrix shapes do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

// A decomposition failed or produced unusable output.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Gradient descent diverged at the configured step size.
class StepSizeError : public Error {
public:
    StepSizeError(const std::string& what, double step)
        : Error(what), step_(step) {}
    double step() const noexcept { return step_; }

private:
    double step_;
};

// Malformed text input; line is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Well-formed input that breaks a data invariant (duplicate entry, unknown level).
class ValidationError : public Error {
public:
    using Error::Error;
};

class CapacityError : public Error {
public:
    using Error::Error;
};

// A search (grid search, delta bisection) found no admissible candidate.
class SearchError : public Error {
public:
    using Error::Error;
};

// A theoretical precondition supplied by the caller does not hold.
class AssumptionError : public Error {
public:
    using Error::Error;
};

}  // namespace qmc
