#pragma once

#include <stdexcept>
#include <string>

namespace netlqr {

/// Invalid argument to a library call (bad dimensions, bad agent id, bad kappa, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A matrix that had to be Schur stable was not, or a simulated state diverged.
class InstabilityError : public std::runtime_error {
 public:
  explicit InstabilityError(const std::string& msg, double spectral_radius = -1.0,
                            long step = -1, int iteration = -1)
      : std::runtime_error(msg),
        spectral_radius_(spectral_radius),
        step_(step),
        iteration_(iteration) {}

  double spectral_radius() const { return spectral_radius_; }
  long step() const { return step_; }
  int iteration() const { return iteration_; }

 private:
  double spectral_radius_;
  long step_;
  int iteration_;
};

/// An iterative numerical procedure failed to converge or produced non-finite data.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad run configuration (rejected before any computation starts).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace netlqr
