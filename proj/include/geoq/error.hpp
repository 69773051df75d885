#pragma once

#include <stdexcept>
#include <string>

namespace geoq {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// h(ξ) fell below the positivity floor required by the conformal metric.
class DomainViolation : public Error {
public:
    using Error::Error;
};

class EvaluationFailure : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

enum class IntegrationFailure {
    StepUnderflow,
    FixedPointNonConvergence,
    MaxStepsExceeded,
    EnergyContract,
};

inline const char* to_string(IntegrationFailure f) {
    switch (f) {
    case IntegrationFailure::StepUnderflow: return "step-size underflow";
    case IntegrationFailure::FixedPointNonConvergence: return "fixed-point non-convergence";
    case IntegrationFailure::MaxStepsExceeded: return "max steps exceeded";
    case IntegrationFailure::EnergyContract: return "energy drift contract violated";
    }
    return "unknown";
}

class IntegrationError : public Error {
public:
    IntegrationError(IntegrationFailure kind, const std::string& what)
        : Error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
    IntegrationFailure kind() const noexcept { return kind_; }

private:
    IntegrationFailure kind_;
};

class EigensolverError : public Error {
public:
    using Error::Error;
};

}  // namespace geoq
