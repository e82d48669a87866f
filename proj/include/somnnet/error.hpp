#pragma once

#include <stdexcept>
#include <string>

namespace somnnet {

// Error vocabulary used across the library. The CLI maps these to
// one-line machine-parsable messages and exit status 1.

struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& m) : std::runtime_error(m) {}
};

struct ParameterError : std::runtime_error {
  explicit ParameterError(const std::string& m) : std::runtime_error(m) {}
};

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& m) : std::runtime_error(m) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& m) : std::runtime_error(m) {}
};

struct TrainingError : std::runtime_error {
  explicit TrainingError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace somnnet
