#pragma once

#include <stdexcept>
#include <string>

namespace ionpulse {

/// Bad input: malformed files, violated type invariants, out-of-range
/// parameters. CLI maps this to exit code 2.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: ambiguous null space, degenerate zeros, pairs that
/// cannot be entangled. CLI maps this to exit code 1.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ionpulse
