#pragma once

#include <stdexcept>
#include <string>

namespace kgtmm {

// Invalid user input: bad config fields, step sizes violating required
// bounds, infeasible generator parameters. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A run produced a non-finite iterate. CLI exit code 3.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& msg, int round)
      : std::runtime_error(msg), round(round) {}
  int round;
};

// Iterative solver failed to reach the requested tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& msg, double residual)
      : std::runtime_error(msg), residual(residual) {}
  double residual;
};

// Mismatched dimensions or other broken call contracts.
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace kgtmm
