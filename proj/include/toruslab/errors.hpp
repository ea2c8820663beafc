#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace toruslab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite input or an argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invariant violated while building a value type (indefinite form, bad metric, ...).
class ConstructionError : public Error {
public:
    using Error::Error;
};

/// Wrong kind of object passed to an operation that only accepts one variant.
class TypeError : public Error {
public:
    using Error::Error;
};

/// Malformed caller-provided data (e.g. a trajectory that is not a geodesic).
class InputError : public Error {
public:
    using Error::Error;
};

/// Implicit-midpoint fixed point did not converge.
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double time) : Error(what), time_(time) {}
    double time() const { return time_; }

private:
    double time_;
};

/// An orbit left the region where the section is transverse to the flow.
class DomainExitError : public Error {
public:
    DomainExitError(const std::string& what, double time) : Error(what), time_(time) {}
    double time() const { return time_; }

private:
    double time_;
};

/// No root of H = e on the requested branch.
class ShellSolveError : public Error {
public:
    using Error::Error;
};

/// Newton refinement of a periodic orbit failed.
class NoOrbitError : public Error {
public:
    using Error::Error;
};

/// The trivial multiplier pair of a monodromy matrix could not be isolated.
class DegenerateMonodromyError : public Error {
public:
    using Error::Error;
};

/// Not enough samples (or bin coverage) to decide a geometric test.
class InsufficientSamplingError : public Error {
public:
    using Error::Error;
};

/// A configured size budget would be exceeded.
class ResourceError : public Error {
public:
    using Error::Error;
};

/// No epsilon on the ladder produced a stable entropy slope.
class InstabilityError : public Error {
public:
    InstabilityError(const std::string& what, std::vector<double> slopes)
        : Error(what), slopes_(std::move(slopes)) {}
    const std::vector<double>& slopes() const { return slopes_; }

private:
    std::vector<double> slopes_;
};

/// Scenario configuration failed validation.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace toruslab
