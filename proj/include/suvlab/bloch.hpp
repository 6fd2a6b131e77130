#pragma once

#include <complex>
#include <utility>

namespace suvlab {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Pure two-level state on the Bloch sphere. theta = 0 is the pointer state
// |0>, theta = pi is |1>. At the poles phi carries no information and is
// reported as 0.
struct BlochState {
  double theta = 0.0;
  double phi = 0.0;

  // Folds arbitrary angles onto theta in [0, pi], phi in [0, 2 pi).
  static BlochState normalized(double theta, double phi);
};

struct StateVector {
  cplx c0{1.0, 0.0};
  cplx c1{0.0, 0.0};

  double norm_squared() const { return std::norm(c0) + std::norm(c1); }
};

struct BornWeights {
  double p0 = 1.0;
  double p1 = 0.0;
};

// c0 = cos(theta/2), c1 = e^{i phi} sin(theta/2).
StateVector to_state_vector(const BlochState& s);

// Inverse of to_state_vector modulo global phase. Throws InvalidState when
// |c0|^2 + |c1|^2 < 1e-14. The input does not have to be normalized.
BlochState from_state_vector(const StateVector& v);

double sigma_z_expectation(const BlochState& s);

// <sigma_z> of an arbitrary (not necessarily normalized) amplitude pair.
double sigma_z_expectation(const StateVector& v);

BornWeights born_weights(const BlochState& s);

// Throws SolverBlowup on zero norm.
StateVector renormalize(const StateVector& v);

// |<a|b>|^2 for normalized inputs.
double fidelity(const StateVector& a, const StateVector& b);

}  // namespace suvlab
