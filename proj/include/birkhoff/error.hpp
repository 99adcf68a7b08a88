#pragma once

#include <stdexcept>
#include <string>

namespace birkhoff {

// Base of every library error. The CLI maps the category to an exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid parameters or inconsistent configuration (exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Query outside the domain where a model or grid is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

// Operation not defined for this model kind (e.g. Legendre of a non-convex H).
class UnsupportedOperation : public Error {
public:
    using Error::Error;
};

// Numerical failures (exit code 3).
class NumericalError : public Error {
public:
    using Error::Error;
};

class IntegrationError : public NumericalError {
public:
    IntegrationError(const std::string& what, double time)
        : NumericalError(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

class PhaseBoxExit : public IntegrationError {
public:
    using IntegrationError::IntegrationError;
};

class ShootingError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NotFoundError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class GeometryError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DomainNotAbsorbing : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateDomain : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ConstructionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace birkhoff
