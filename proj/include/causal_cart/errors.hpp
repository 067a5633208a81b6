#pragma once

#include <stdexcept>
#include <string>

namespace ccart {

// Invalid configuration values (xi outside (0,1), K < 1, unknown config key, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Arguments outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Mismatched shapes, too-small inputs, windows exceeding a path.
class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Preconditions of a statistical procedure are not met (e.g. too few samples).
class StatisticalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ccart
