#include "suvlab/collapse.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "suvlab/errors.hpp"

namespace suvlab {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

bool finite_nonnegative(double x) { return std::isfinite(x) && x >= 0.0; }

void check_ratio(double J, double G) {
  if (J == 0.0 && G != 0.0) {
    throw IllDefinedRatio("G/J is undefined: J = 0 while G = " + std::to_string(G));
  }
}

}  // namespace

void SuvParams::validate() const {
  require(finite_nonnegative(J), "params.J must be >= 0");
  require(finite_nonnegative(G), "params.G must be >= 0");
  require(finite_nonnegative(epsilon), "params.epsilon must be >= 0");
  require(std::isfinite(n_order) && n_order >= 1.0, "params.N_order must be >= 1");
  require(finite_nonnegative(omega_rabi), "params.omega_rabi must be >= 0");
}

std::string to_string(Scheme s) {
  return s == Scheme::kStratonovichHeun ? "stratonovich_heun" : "ito_euler";
}

void IntegratorConfig::validate() const {
  require(std::isfinite(dt) && dt > 0.0, "integrator.dt must be > 0");
  require(std::isfinite(max_time) && max_time > 0.0, "integrator.max_time must be > 0");
  require(pole_epsilon > 0.0 && pole_epsilon < 0.5 * kPi,
          "integrator.pole_epsilon must lie in (0, pi/2)");
}

std::size_t IntegratorConfig::steps() const {
  return static_cast<std::size_t>(std::ceil(max_time / dt - 1e-9));
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::kPole0:
      return "pole0";
    case Outcome::kPole1:
      return "pole1";
    case Outcome::kUnresolved:
      break;
  }
  return "unresolved";
}

double theta_drift(double theta, double xi, double J, double G) {
  require(theta >= 0.0 && theta <= kPi, "theta_drift: theta must lie in [0, pi]");
  check_ratio(J, G);
  if (J == 0.0) return 0.0;
  return -J * std::sin(theta) * (std::cos(theta) - (G / J) * xi);
}

FixedPointReport classify_fixed_points(double xi, double J, double G) {
  check_ratio(J, G);
  const double r = J == 0.0 ? 0.0 : (G / J) * xi;
  FixedPointReport report;
  if (r > -1.0 && r < 1.0) {
    report.attractive = {0.0, kPi};
    report.repulsive = {std::acos(r)};
  } else if (r >= 1.0) {
    // cos(theta) - r <= 0 everywhere: every interior state drains to pi.
    report.attractive = {kPi};
  } else {
    report.attractive = {0.0};
  }
  return report;
}

std::vector<FlowSample> flow_field(std::span<const double> theta_grid, double xi, double J,
                                   double G) {
  std::vector<FlowSample> out;
  out.reserve(theta_grid.size());
  for (double theta : theta_grid) out.push_back({theta, theta_drift(theta, xi, J, G)});
  return out;
}

PolarStepper::PolarStepper(const SuvParams& p, const IntegratorConfig& cfg)
    : j_(p.effective_J()),
      g_(p.effective_G()),
      dt_(cfg.dt),
      band_(cfg.pole_epsilon),
      scheme_(cfg.scheme) {
  p.validate();
  cfg.validate();
  check_ratio(j_, g_);
}

Trajectory evolve_trajectory(const BlochState& s0, const SuvParams& p, const NoisePath& path,
                             const IntegratorConfig& cfg) {
  const PolarStepper stepper(p, cfg);
  require(s0.theta >= 0.0 && s0.theta <= kPi, "evolve_trajectory: theta0 must lie in [0, pi]");
  require(std::abs(path.dt - cfg.dt) <= 1e-12 * cfg.dt,
          "evolve_trajectory: noise path dt does not match integrator dt");
  const std::size_t steps = cfg.steps();
  require(path.size() >= steps, "evolve_trajectory: noise path shorter than max_time/dt");

  Trajectory traj;
  traj.noise_seed = path.seed;
  traj.times.reserve(std::min<std::size_t>(steps + 1, 1 << 20));
  traj.thetas.reserve(traj.times.capacity());

  double theta = s0.theta;
  traj.times.push_back(0.0);
  traj.thetas.push_back(theta);
  traj.outcome = stepper.classify(theta);
  if (traj.outcome != Outcome::kUnresolved) {
    traj.collapse_time = 0.0;
    return traj;
  }
  for (std::size_t k = 0; k < steps; ++k) {
    theta = stepper.step(theta, path.values[k]);
    if (!std::isfinite(theta)) throw NumericBlowup("evolve_trajectory: non-finite theta", k);
    const double t = static_cast<double>(k + 1) * cfg.dt;
    traj.times.push_back(t);
    traj.thetas.push_back(theta);
    traj.outcome = stepper.classify(theta);
    if (traj.outcome != Outcome::kUnresolved) {
      traj.collapse_time = t;
      break;
    }
  }
  return traj;
}

namespace {

struct Amplitudes {
  cplx c0;
  cplx c1;
};

// d/dt of the amplitudes, hbar = 1.
Amplitudes generator(const Amplitudes& a, double half_omega, double kj, double kg, double xi) {
  const double n0 = std::norm(a.c0);
  const double n1 = std::norm(a.c1);
  const double z = (n0 - n1) / (n0 + n1);
  const double k = kj * z + kg * xi;
  const cplx minus_i_half_omega{0.0, -half_omega};
  return {minus_i_half_omega * a.c1 + k * (1.0 - z) * a.c0,
          minus_i_half_omega * a.c0 + k * (-1.0 - z) * a.c1};
}

}  // namespace

std::vector<StateVector> evolve_state_vector(const StateVector& v0, const SuvParams& p,
                                             const NoisePath& path, const IntegratorConfig& cfg,
                                             bool include_h0) {
  p.validate();
  cfg.validate();
  if (std::abs(v0.norm_squared() - 1.0) > 1e-10) {
    throw InvalidState("evolve_state_vector: initial state is not normalized");
  }
  require(std::abs(path.dt - cfg.dt) <= 1e-12 * cfg.dt,
          "evolve_state_vector: noise path dt does not match integrator dt");
  const std::size_t steps = cfg.steps();
  require(path.size() >= steps, "evolve_state_vector: noise path shorter than max_time/dt");

  const double half_omega = include_h0 ? 0.5 * p.omega_rabi : 0.0;
  const double kj = p.effective_J();
  const double kg = p.effective_G();
  const double dt = cfg.dt;

  std::vector<StateVector> out;
  out.reserve(steps + 1);
  out.push_back(v0);
  Amplitudes a{v0.c0, v0.c1};
  for (std::size_t k = 0; k < steps; ++k) {
    const double xi = path.values[k];
    const Amplitudes f0 = generator(a, half_omega, kj, kg, xi);
    Amplitudes next{a.c0 + f0.c0 * dt, a.c1 + f0.c1 * dt};
    if (cfg.scheme == Scheme::kStratonovichHeun) {
      const Amplitudes f1 = generator(next, half_omega, kj, kg, xi);
      next = {a.c0 + 0.5 * dt * (f0.c0 + f1.c0), a.c1 + 0.5 * dt * (f0.c1 + f1.c1)};
    }
    StateVector v{next.c0, next.c1};
    const double n2 = v.norm_squared();
    if (!std::isfinite(n2)) throw NumericBlowup("evolve_state_vector: non-finite amplitude", k);
    if (cfg.renormalize_every_step || n2 == 0.0) v = renormalize(v);
    a = {v.c0, v.c1};
    out.push_back(v);
  }
  return out;
}

SuvParams polar_equivalent(const SuvParams& p) {
  SuvParams q = p;
  q.J = 2.0 * p.effective_J();
  q.G = 2.0 * p.effective_G();
  q.epsilon = 1.0;
  q.n_order = 1.0;
  return q;
}

std::vector<StateVector> rabi_evolution(const StateVector& v0, double omega, double dt,
                                        double t_end) {
  require(std::isfinite(omega) && omega > 0.0, "rabi_evolution: omega must be > 0");
  require(std::isfinite(dt) && dt > 0.0, "rabi_evolution: dt must be > 0");
  require(std::isfinite(t_end) && t_end >= 0.0, "rabi_evolution: t_end must be >= 0");

  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  std::vector<StateVector> out;
  out.reserve(steps + 1);
  out.push_back(v0);

  // exp(-i (omega/2) sigma_x h) = cos(omega h/2) - i sin(omega h/2) sigma_x
  auto rotate = [omega](const StateVector& v, double h) {
    const double c = std::cos(0.5 * omega * h);
    const cplx ms{0.0, -std::sin(0.5 * omega * h)};
    return StateVector{c * v.c0 + ms * v.c1, ms * v.c0 + c * v.c1};
  };
  StateVector v = v0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double h = (k + 1 == steps) ? t_end - static_cast<double>(k) * dt : dt;
    v = rotate(v, h);
    out.push_back(v);
  }
  return out;
}

}  // namespace suvlab
