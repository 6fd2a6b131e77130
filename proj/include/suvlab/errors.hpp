#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace suvlab {

// Base for every error raised by the library. Callers that only need to
// distinguish "our" failures from std::bad_alloc and friends catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A state that cannot be normalized or violates a physical bound
// (zero amplitude vector, sub-Heisenberg Gaussian widths, ...).
class InvalidState : public Error {
 public:
  using Error::Error;
};

// The non-unitary generator drove the amplitudes to zero norm.
class SolverBlowup : public Error {
 public:
  using Error::Error;
};

// A non-finite value appeared during integration.
class NumericBlowup : public Error {
 public:
  NumericBlowup(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// G/J is undefined because J vanishes while G does not.
class IllDefinedRatio : public Error {
 public:
  using Error::Error;
};

// Too many trajectories never reached a pole band.
class HorizonTooShort : public Error {
 public:
  using Error::Error;
};

class UnsupportedPotential : public Error {
 public:
  using Error::Error;
};

// Time step violates the advection CFL bound.
class StabilityError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace suvlab
