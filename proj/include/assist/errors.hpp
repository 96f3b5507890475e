#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace assist {

// Invalid arguments, shape mismatches and malformed inputs.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Configuration errors carry the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Raised when local training produces a non-finite parameter.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(std::int64_t iteration)
      : std::runtime_error("non-finite parameters at iteration " +
                           std::to_string(iteration)),
        iteration_(iteration) {}
  std::int64_t iteration() const { return iteration_; }

 private:
  std::int64_t iteration_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace assist
