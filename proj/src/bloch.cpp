#include "suvlab/bloch.hpp"

#include <cmath>

#include "suvlab/errors.hpp"

namespace suvlab {

namespace {

constexpr double kDegenerateNorm = 1e-14;

}  // namespace

BlochState BlochState::normalized(double theta, double phi) {
  constexpr double two_pi = 2.0 * kPi;
  theta = std::remainder(theta, two_pi);  // (-pi, pi]
  if (theta < 0.0) {
    // Going through the pole flips the azimuth.
    theta = -theta;
    phi += kPi;
  }
  phi = std::fmod(phi, two_pi);
  if (phi < 0.0) phi += two_pi;
  if (phi >= two_pi) phi = 0.0;
  if (theta == 0.0 || theta == kPi) phi = 0.0;
  return {theta, phi};
}

StateVector to_state_vector(const BlochState& s) {
  const double half = 0.5 * s.theta;
  return {cplx{std::cos(half), 0.0}, std::polar(std::sin(half), s.phi)};
}

BlochState from_state_vector(const StateVector& v) {
  const double n2 = v.norm_squared();
  if (!(n2 >= kDegenerateNorm)) {
    throw InvalidState("from_state_vector: degenerate amplitudes, |c0|^2+|c1|^2 = " +
                       std::to_string(n2));
  }
  const double a0 = std::abs(v.c0);
  const double a1 = std::abs(v.c1);
  const double theta = 2.0 * std::atan2(a1, a0);
  if (a0 == 0.0 || a1 == 0.0) return {theta, 0.0};
  // Relative phase of c1 with respect to c0; the global phase drops out.
  const double phi = std::arg(v.c1 * std::conj(v.c0));
  return BlochState::normalized(theta, phi);
}

double sigma_z_expectation(const BlochState& s) { return std::cos(s.theta); }

double sigma_z_expectation(const StateVector& v) {
  const double p0 = std::norm(v.c0);
  const double p1 = std::norm(v.c1);
  return (p0 - p1) / (p0 + p1);
}

BornWeights born_weights(const BlochState& s) {
  const double c = std::cos(0.5 * s.theta);
  const double p0 = c * c;
  return {p0, 1.0 - p0};
}

StateVector renormalize(const StateVector& v) {
  const double n2 = v.norm_squared();
  if (!(n2 > 0.0) || !std::isfinite(n2)) {
    throw SolverBlowup("renormalize: state norm is " + std::to_string(std::sqrt(n2)));
  }
  const double inv = 1.0 / std::sqrt(n2);
  return {v.c0 * inv, v.c1 * inv};
}

double fidelity(const StateVector& a, const StateVector& b) {
  return std::norm(std::conj(a.c0) * b.c0 + std::conj(a.c1) * b.c1);
}

}  // namespace suvlab
