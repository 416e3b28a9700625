#pragma once

#include <stdexcept>
#include <string>

namespace dualpinn {

/// Bad user input: malformed config file, invalid hyperparameter, unusable CLI
/// arguments. Maps to process exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A caller broke an API precondition (dimension mismatch, empty batch, ...).
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

/// Training aborted (non-finite loss, ...). Maps to process exit code 1.
class TrainingError : public std::runtime_error {
 public:
  explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dualpinn
