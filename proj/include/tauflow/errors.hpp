#pragma once

#include <stdexcept>
#include <string>

namespace tauflow {

struct InvalidMetricError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct GridMismatchError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// W evaluated on an f that violates the normalization constraint.
struct ConstraintError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PositivityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace tauflow
