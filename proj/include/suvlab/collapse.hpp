#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "suvlab/bloch.hpp"
#include "suvlab/noise.hpp"

namespace suvlab {

// Couplings of the SUV two-state model. Rates are in 1/s. epsilon and
// n_order only ever appear through the products epsilon*n_order*J and
// epsilon*n_order*G, but stay separate so scaling studies can sweep either.
struct SuvParams {
  double J = 1.0;
  double G = 1.0;
  double epsilon = 1.0;
  double n_order = 1.0;
  double omega_rabi = 0.0;

  double rate_scale() const { return epsilon * n_order; }
  double effective_J() const { return rate_scale() * J; }
  double effective_G() const { return rate_scale() * G; }

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

enum class Scheme { kStratonovichHeun, kItoEuler };

std::string to_string(Scheme s);

struct IntegratorConfig {
  double dt = 1e-4;
  Scheme scheme = Scheme::kStratonovichHeun;
  double max_time = 60.0;
  double pole_epsilon = 1e-3;
  bool renormalize_every_step = true;

  void validate() const;
  // Number of steps needed to cover max_time.
  std::size_t steps() const;
};

enum class Outcome { kPole0, kPole1, kUnresolved };

std::string to_string(Outcome o);

struct Trajectory {
  std::vector<double> times;
  std::vector<double> thetas;
  Outcome outcome = Outcome::kUnresolved;
  std::optional<double> collapse_time;
  std::uint64_t noise_seed = 0;
};

struct FixedPointReport {
  std::vector<double> attractive;
  std::vector<double> repulsive;
};

struct FlowSample {
  double theta;
  double dtheta_dt;
};

// Right-hand side of the polar-angle collapse equation,
//   dtheta/dt = -J sin(theta) (cos(theta) - (G/J) xi).
// Throws IllDefinedRatio for J = 0 with G > 0.
double theta_drift(double theta, double xi, double J, double G);

// Fixed points of the flow under a frozen field. For |G xi / J| < 1 the poles
// attract and arccos(G xi / J) repels. Otherwise the drift is one-signed on
// (0, pi) and only the downstream pole attracts.
FixedPointReport classify_fixed_points(double xi, double J, double G);

std::vector<FlowSample> flow_field(std::span<const double> theta_grid, double xi, double J,
                                   double G);

// One step of the polar-angle SDE with clamping into [0, pi]. Shared by the
// single-trajectory and ensemble drivers so both integrate identically.
class PolarStepper {
 public:
  PolarStepper(const SuvParams& p, const IntegratorConfig& cfg);

  double step(double theta, double xi) const {
    const double f0 = drift(theta, xi);
    if (scheme_ == Scheme::kItoEuler) return confine(theta + f0 * dt_);
    const double predicted = confine(theta + f0 * dt_);
    return confine(theta + 0.5 * (f0 + drift(predicted, xi)) * dt_);
  }

  Outcome classify(double theta) const {
    if (theta < band_) return Outcome::kPole0;
    if (theta > kPi - band_) return Outcome::kPole1;
    return Outcome::kUnresolved;
  }

  double dt() const { return dt_; }

 private:
  double drift(double theta, double xi) const {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    return s * (g_ * xi - j_ * c);
  }

  // Overshoots below kReflect are mirrored back; larger ones pin to the pole.
  static double confine(double theta) {
    constexpr double kReflect = 1e-6;
    if (theta < 0.0) return theta > -kReflect ? -theta : 0.0;
    if (theta > kPi) return theta - kPi < kReflect ? 2.0 * kPi - theta : kPi;
    return theta;
  }

  double j_;
  double g_;
  double dt_;
  double band_;
  Scheme scheme_;
};

// Integrates the polar-angle SDE along `path` until a pole band is entered or
// max_time is reached. path.dt must equal cfg.dt. Throws NumericBlowup with
// the step index on a non-finite angle.
Trajectory evolve_trajectory(const BlochState& s0, const SuvParams& p, const NoisePath& path,
                             const IntegratorConfig& cfg);

// Integrates the amplitudes under H0 (optional) plus the non-unitary
// generator eps*N*(J<sz> + G xi)(sz - <sz>), hbar = 1. Returns steps()+1
// states including v0. Throws SolverBlowup on zero norm.
std::vector<StateVector> evolve_state_vector(const StateVector& v0, const SuvParams& p,
                                             const NoisePath& path, const IntegratorConfig& cfg,
                                             bool include_h0);

// Couplings for evolve_trajectory that reproduce the polar angle induced by
// evolve_state_vector (H0 off) when the polar run is fed the negated path.
// The amplitude generator gives dtheta = -2 eps N sin(theta)(J cos(theta) + G xi) dt.
SuvParams polar_equivalent(const SuvParams& p);

// Exact unitary evolution under H0 = (omega/2) sigma_x. The last step is
// shortened so the final state sits exactly at t_end.
std::vector<StateVector> rabi_evolution(const StateVector& v0, double omega, double dt,
                                        double t_end);

}  // namespace suvlab
