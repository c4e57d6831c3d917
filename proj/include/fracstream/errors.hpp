#pragma once

#include <stdexcept>
#include <string>

namespace fracstream {

/// Bad numeric input: wrong dimensions, non-finite entries, violated preconditions.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Bad run configuration (grid size, fractional order, time grid, config file keys).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Sparse factorization or iterative solve broke down.
class FactorizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace fracstream
