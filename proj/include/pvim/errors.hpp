#pragma once

#include <stdexcept>
#include <string>

namespace pvim {

/// Invalid distribution parameters, out-of-range arguments, empty nulls.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Inconsistent run configuration (e.g. Monte Carlo without a seed).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Caller asked for something the audit cannot mean (theta outside the assertion, zero reps).
class MisuseError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The model cannot support the requested construction.
class UnsupportedModel : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Some focal set Theta_x(u) is empty, so u-space belief/plausibility is undefined.
class EmptyFocalSetError : public std::runtime_error {
public:
    EmptyFocalSetError(const std::string& what, double x, double witness_u, double empty_measure)
        : std::runtime_error(what), x_(x), witness_u_(witness_u), empty_measure_(empty_measure) {}

    double observation() const noexcept { return x_; }
    double witness_u() const noexcept { return witness_u_; }
    double empty_measure() const noexcept { return empty_measure_; }

private:
    double x_;
    double witness_u_;
    double empty_measure_;
};

}  // namespace pvim
