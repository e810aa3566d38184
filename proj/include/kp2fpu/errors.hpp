#pragma once

#include <stdexcept>
#include <string>

namespace kp2fpu {

/// Invalid configuration, mismatched dimensions, incommensurate boxes.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A field violates an analytic constraint (e.g. nonzero kxi=0 content
/// where an antiderivative in xi is requested).
class ConstraintError : public std::runtime_error {
 public:
  explicit ConstraintError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite values appeared during time stepping.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, double last_valid_time)
      : std::runtime_error(what), last_valid_time(last_valid_time) {}
  double last_valid_time;
};

}  // namespace kp2fpu
