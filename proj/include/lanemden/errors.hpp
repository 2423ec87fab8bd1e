#pragma once

#include <stdexcept>
#include <string>

namespace lanemden {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user input: degenerate grids, p <= 1, exponents outside their range.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A barrier recipe was requested for exponents it does not cover.
class RecipeMismatchError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Caller broke an operation precondition (field ordering, shape, positivity).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A certificate could not be established (e.g. no finite comparison constant).
class CertificateError : public Error {
public:
    using Error::Error;
};

/// Negative power of a nonpositive value; the barrier failed to keep iterates positive.
class SingularityError : public Error {
public:
    SingularityError(const std::string& what, std::size_t node)
        : Error(what), node_(node) {}

    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

/// A converged system solution left the barrier rectangle.
class EnclosureError : public Error {
public:
    using Error::Error;
};

/// Should not happen; signals a broken internal invariant.
class InternalError : public Error {
public:
    using Error::Error;
};

}  // namespace lanemden
