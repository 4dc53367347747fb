#pragma once

#include <stdexcept>
#include <string>

namespace cbench {

/// Invalid law, kernel or experiment parameters.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation (empty input, p outside (0,1), ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Inputs that are well-typed but violate a precondition of the statistic (low expected counts,
/// crossing quantile predictors, zero-mass partition cells).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical routine failed to converge; the message carries the diagnostics.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cbench
