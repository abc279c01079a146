#pragma once

#include <stdexcept>
#include <string>

namespace bornsim {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was not met (shape, range, normalization).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class NormalizationError : public InvalidArgument {
public:
    NormalizationError(const std::string& what, double norm)
        : InvalidArgument(what), norm_(norm) {}

    double norm() const noexcept { return norm_; }

private:
    double norm_;
};

class DimensionMismatch : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// A physical or numerical invariant was violated during a computation.
/// `invariant()` names the violated property, e.g. "trace" or "stability".
class InvariantViolation : public Error {
public:
    InvariantViolation(std::string invariant, const std::string& what)
        : Error(what), invariant_(std::move(invariant)) {}

    const std::string& invariant() const noexcept { return invariant_; }

private:
    std::string invariant_;
};

/// Configuration could not be parsed or validated. `field()` is the
/// offending key when one is known.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace bornsim
