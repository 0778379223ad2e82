#pragma once

#include <stdexcept>
#include <string>

namespace confspace {

// Caller broke a documented contract (duplicate point, support escaping
// window, x already in the configuration, ...).
struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Quadrature failed to reach the requested accuracy.
struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A Markov chain rejected every proposal for longer than the configured limit.
struct ChainStuckError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Request exceeds a configured resource budget (e.g. Charlier order).
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Experiment configuration file is malformed or references unknown names.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace confspace
