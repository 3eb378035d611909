#pragma once

#include <stdexcept>
#include <string>

namespace agelab {

/// Base error type for all failures raised by this library.
class AgelabError : public std::runtime_error {
  public:
    explicit AgelabError(const std::string &what_arg) : std::runtime_error(what_arg) {}
};

/// Raised when a statistic is undefined for the given input (zero variance etc.).
class UndefinedStatisticError : public AgelabError {
  public:
    explicit UndefinedStatisticError(const std::string &what_arg) : AgelabError(what_arg) {}
};

/// Raised for invalid configuration values, including unresolved names.
class ConfigError : public AgelabError {
  public:
    explicit ConfigError(const std::string &what_arg) : AgelabError(what_arg) {}
};

} // namespace agelab
