#pragma once

#include <stdexcept>
#include <string>

namespace gbs {

/// Invalid user-supplied input: config values, patterns, interferometers.
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Numerical-input violations: shape, symmetry, definiteness, size guards.
struct MatrixError : std::domain_error {
    explicit MatrixError(const std::string& msg) : std::domain_error(msg) {}
};

/// A work or memory guard tripped before starting an oversized computation.
struct GuardError : std::runtime_error {
    explicit GuardError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gbs
