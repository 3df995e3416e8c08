#pragma once

#include <stdexcept>
#include <string>

namespace fockpass {

// Bad or inconsistent input parameters / configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Integrator or eigensolver could not deliver a trustworthy result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Inputs are well formed but violate a physical validity condition
// (e.g. rotating-wave approximation).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fockpass
