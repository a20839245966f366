#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rindler {

/// Input outside the mathematical domain of an operation (non-positive
/// acceleration, zero wave number, non-PSD state, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Requested size exceeds what a dense construction supports.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Eigen-solver or root-finder failure.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Time integration left the physical state space.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(std::int64_t step, const std::string& what)
      : std::runtime_error("integration failure at step " + std::to_string(step) + ": " + what),
        step_(step) {}

  std::int64_t step() const noexcept { return step_; }

 private:
  std::int64_t step_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rindler
