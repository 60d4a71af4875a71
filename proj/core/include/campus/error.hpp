#pragma once

#include <stdexcept>
#include <string>

namespace campus {

// Bad argument to a pure function (empty marginals, degenerate design, ...).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Configuration file or ModelConfig violates a documented constraint.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Regression or variance estimator cannot be formed from the data.
class DegenerateDesign : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace campus
