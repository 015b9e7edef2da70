#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace riesne {

/// Caller supplied arguments that violate an operation's preconditions.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A geometric operation is undefined for the given inputs (e.g. log map of
/// antipodal points on the sphere).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Eigen-solves that fail, non-finite optimizer state, and similar.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or invalid input data. Carries the 1-based source line when known.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace riesne
