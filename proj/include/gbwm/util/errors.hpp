#pragma once

#include <stdexcept>
#include <string>

namespace gbwm {

// Bad user input: malformed files, out-of-range parameters, missing fields.
// CLI maps this to exit code 2.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure (non-finite intermediate, impossible bracket, ...).
// CLI maps this to exit code 3.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Incompatible or corrupted serialized artifact (checkpoint, table file).
// CLI maps this to exit code 4.
struct VersionError : std::runtime_error {
  explicit VersionError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gbwm
