#pragma once

#include <stdexcept>
#include <string>

namespace ionwave {

// Bad input files, bad configs, contract violations at the API boundary.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Solver non-convergence, unstable discretizations, out-of-domain sampling.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Ion left the simulation domain during transport.
class IonLossError : public std::runtime_error {
 public:
  explicit IonLossError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ionwave
