#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "suvlab/bloch.hpp"

namespace suvlab {

// Uniform (x, p) lattice including both end points.
struct PhaseGrid {
  double x_min = -10.0;
  double x_max = 10.0;
  std::size_t nx = 256;
  double p_min = -4.0;
  double p_max = 4.0;
  std::size_t np = 256;

  void validate() const;
  double dx() const { return (x_max - x_min) / static_cast<double>(nx - 1); }
  double dp() const { return (p_max - p_min) / static_cast<double>(np - 1); }
  double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx(); }
  double p(std::size_t j) const { return p_min + static_cast<double>(j) * dp(); }
  std::size_t size() const { return nx * np; }
};

// Quasi-probability W(x, p) on a PhaseGrid, stored x-major: values[i * np + j].
// Complex because the literal SUV transport has an imaginary coefficient.
struct WignerField {
  PhaseGrid grid;
  std::vector<cplx> values;
  double time = 0.0;
  double hbar = 1.0;

  cplx& at(std::size_t i, std::size_t j) { return values[i * grid.np + j]; }
  const cplx& at(std::size_t i, std::size_t j) const { return values[i * grid.np + j]; }
};

// H_SUV = P^2 / 2m + i eps N (X - x0)^2 for the centre-of-mass coordinate.
struct CrystalParams {
  double m_tot = 1.0;
  double epsilon = 0.0;
  double n_order = 1.0;
  double x0 = 0.0;

  // Coefficient 2 eps N of (X - x0) in the transport equation.
  double force_constant() const { return 2.0 * epsilon * n_order; }
  void validate() const;
};

enum class WignerMode {
  // dW/dt = 2i eps N (x - x0) dW/dp - (p/m) dW/dx, W complex.
  kAsWrittenComplex,
  // Same with 2i eps N -> 2 eps N: a real restoring force toward x0.
  kRealEffective,
};

enum class Advection { kThirdOrderUpwind, kFirstOrderUpwind };

std::string to_string(WignerMode mode);
std::string to_string(Advection scheme);

struct EvolveOptions {
  WignerMode mode = WignerMode::kRealEffective;
  Advection advection = Advection::kThirdOrderUpwind;
  // Divide by the (complex) total after every step; complex mode only.
  bool renormalize = false;
  // Bound on dt * (max|v_x|/dx + max|v_p|/dp).
  double cfl_limit = 0.8;
};

struct WignerEvolution {
  WignerField field;
  // Net loss of the real mass through the absorbing boundary, relative to the start.
  double outflow_fraction = 0.0;
  std::vector<std::string> warnings;
};

// Polynomial U(x) = sum_k coefficients[k] (x - x0)^k.
struct Potential {
  std::vector<cplx> coefficients;
  double x0 = 0.0;

  static Potential quadratic(cplx coefficient, double x0 = 0.0);
  // Highest power with a non-zero coefficient; 0 for the zero polynomial.
  std::size_t degree() const;
  // Coefficients of d^order U / dx^order, same expansion point.
  Potential derivative(std::size_t order) const;
  bool is_zero() const;
};

// Pure-state Wigner transform of a wavefunction sampled on grid.x:
//   W(x, p) = (1 / 2 pi hbar) int exp(-i p y / hbar) psi(x + y/2) psi*(x - y/2) dy,
// evaluated with y on the 2 dx lattice. Throws InvalidState if the trapezoid
// norm of psi is off by more than 1e-6.
WignerField compute_wigner(std::span<const cplx> psi, const PhaseGrid& grid, double hbar);

// Product Gaussian with the given means and widths. Throws InvalidState if
// sigma_x * sigma_p < hbar / 2.
WignerField gaussian_wigner(double x_mean, double p_mean, double sigma_x, double sigma_p,
                            const PhaseGrid& grid, double hbar);

// Moyal correction sum_n (-hbar/2)^{2n} / (2n+1)! U^{(2n+1)}(x) d^{2n+1}W/dp^{2n+1}.
// Every term needs a third or higher derivative of U, so the result is
// identically zero for polynomials of degree <= 2. Higher degrees throw
// UnsupportedPotential.
WignerField quantum_correction(const Potential& potential, const WignerField& field);
WignerField quantum_correction(cplx quadratic_coefficient, const WignerField& field);

// dt * (max|v_x|/dx + max|v_p|/dp) for this field's grid.
double courant_number(const PhaseGrid& grid, const CrystalParams& params, double dt);

// SSP-RK3 in time with upwind advection and absorbing boundaries. Throws
// StabilityError before stepping if the Courant number exceeds the limit.
WignerEvolution evolve_wigner(const WignerField& field, const CrystalParams& params, double dt,
                              std::size_t steps, const EvolveOptions& options = {});

struct Marginals {
  std::vector<double> position;
  std::vector<double> momentum;
  // Largest |integral of Im W| over either marginal.
  double imag_residual = 0.0;
};

Marginals marginals(const WignerField& field);

// Trapezoid integral of W over the grid.
cplx total_mass(const WignerField& field);

struct Widths {
  double sigma_x = 0.0;
  double sigma_p = 0.0;
  double centroid_x = 0.0;
  double centroid_p = 0.0;
};

// Centroid and rms widths of |W| / integral |W|.
Widths localization_widths(const WignerField& field);

enum class LimitOrder { kEpsFirst, kNFirst };

std::string to_string(LimitOrder order);

struct LimitRow {
  double eps;
  double n_order;
  double sigma_x_eff;
  double sigma_p_eff;
  double centroid_x;
  // max_p |rho_p(t_end) - rho_p(0)|
  double momentum_marginal_change;
};

// Evaluates the nested double sequence of (eps, N) in the given order: for
// kEpsFirst the eps sequence is run to its end at each N, for kNFirst the N
// sequence is run to its end at each eps. Each row evolves field0 in
// real-effective mode to t_end, with dt reduced as needed for stability.
std::vector<LimitRow> limit_experiment(LimitOrder order, std::span<const double> eps_sequence,
                                       std::span<const double> n_sequence,
                                       const CrystalParams& base, const WignerField& field0,
                                       double dt, double t_end);

}  // namespace suvlab
