#include "suvlab/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "suvlab/errors.hpp"

namespace suvlab {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

// Trapezoid weight of node k out of n.
double trap(std::size_t k, std::size_t n) { return (k == 0 || k + 1 == n) ? 0.5 : 1.0; }

WignerField blank_like(const PhaseGrid& grid, double hbar, double time = 0.0) {
  WignerField f;
  f.grid = grid;
  f.values.assign(grid.size(), cplx{});
  f.hbar = hbar;
  f.time = time;
  return f;
}

// Upwind first derivative of a strided line at index k with zero ghost
// values beyond the ends. `positive` selects the stencil for a positive
// advection speed (information flowing toward larger k).
cplx upwind_derivative(const cplx* u, std::size_t stride, std::size_t k, std::size_t n,
                       bool positive, double h, Advection scheme) {
  auto at = [&](std::ptrdiff_t m) -> cplx {
    if (m < 0 || m >= static_cast<std::ptrdiff_t>(n)) return {};
    return u[static_cast<std::size_t>(m) * stride];
  };
  const auto i = static_cast<std::ptrdiff_t>(k);
  if (scheme == Advection::kFirstOrderUpwind) {
    return positive ? (at(i) - at(i - 1)) / h : (at(i + 1) - at(i)) / h;
  }
  if (positive) {
    return (2.0 * at(i + 1) + 3.0 * at(i) - 6.0 * at(i - 1) + at(i - 2)) / (6.0 * h);
  }
  return (-at(i + 2) + 6.0 * at(i + 1) - 3.0 * at(i) - 2.0 * at(i - 1)) / (6.0 * h);
}

class TransportOperator {
 public:
  TransportOperator(const PhaseGrid& grid, const CrystalParams& params,
                    const EvolveOptions& options)
      : grid_(grid), options_(options), inv_m_(1.0 / params.m_tot) {
    force_.resize(grid.nx);
    for (std::size_t i = 0; i < grid.nx; ++i) {
      force_[i] = params.force_constant() * (grid.x(i) - params.x0);
    }
    has_force_ = params.force_constant() != 0.0;
  }

  // out = L(u) for
  //   dW/dt = -(p/m) dW/dx + c * 2 eps N (x - x0) dW/dp,  c = 1 or i.
  void apply(const std::vector<cplx>& u, std::vector<cplx>& out) const {
    const std::size_t nx = grid_.nx;
    const std::size_t np = grid_.np;
    const double dx = grid_.dx();
    const double dp = grid_.dp();
    const bool complex_mode = options_.mode == WignerMode::kAsWrittenComplex;
    for (std::size_t i = 0; i < nx; ++i) {
      const cplx* row = u.data() + i * np;
      // Velocity along p is -force; the stencil follows its sign in both modes.
      const bool p_positive = -force_[i] > 0.0;
      for (std::size_t j = 0; j < np; ++j) {
        const double vx = grid_.p(j) * inv_m_;
        cplx rate = -vx * upwind_derivative(u.data() + j, np, i, nx, vx > 0.0, dx,
                                            options_.advection);
        if (has_force_) {
          const cplx dwdp =
              upwind_derivative(row, 1, j, np, p_positive, dp, options_.advection);
          const cplx term = force_[i] * dwdp;
          rate += complex_mode ? cplx{-term.imag(), term.real()} : term;
        }
        out[i * np + j] = rate;
      }
    }
  }

 private:
  const PhaseGrid& grid_;
  EvolveOptions options_;
  double inv_m_;
  std::vector<double> force_;
  bool has_force_ = false;
};

}  // namespace

void PhaseGrid::validate() const {
  require(nx >= 16 && np >= 16, "grid: nx and np must be >= 16");
  require(std::isfinite(x_min) && std::isfinite(x_max) && x_max > x_min,
          "grid: x bounds must be finite and ordered");
  require(std::isfinite(p_min) && std::isfinite(p_max) && p_max > p_min,
          "grid: p bounds must be finite and ordered");
}

void CrystalParams::validate() const {
  require(std::isfinite(m_tot) && m_tot > 0.0, "crystal.m_tot must be > 0");
  require(std::isfinite(epsilon) && epsilon >= 0.0, "crystal.epsilon must be >= 0");
  require(std::isfinite(n_order) && n_order >= 1.0, "crystal.N_order must be >= 1");
  require(std::isfinite(x0), "crystal.x0 must be finite");
}

std::string to_string(WignerMode mode) {
  return mode == WignerMode::kAsWrittenComplex ? "as_written_complex" : "real_effective";
}

std::string to_string(Advection scheme) {
  return scheme == Advection::kThirdOrderUpwind ? "third_order_upwind" : "first_order_upwind";
}

std::string to_string(LimitOrder order) {
  return order == LimitOrder::kEpsFirst ? "eps_first" : "n_first";
}

Potential Potential::quadratic(cplx coefficient, double x0) {
  return Potential{{cplx{}, cplx{}, coefficient}, x0};
}

std::size_t Potential::degree() const {
  for (std::size_t k = coefficients.size(); k-- > 0;) {
    if (coefficients[k] != cplx{}) return k;
  }
  return 0;
}

bool Potential::is_zero() const {
  return std::all_of(coefficients.begin(), coefficients.end(),
                     [](const cplx& c) { return c == cplx{}; });
}

Potential Potential::derivative(std::size_t order) const {
  Potential d{{}, x0};
  for (std::size_t k = order; k < coefficients.size(); ++k) {
    double falling = 1.0;
    for (std::size_t m = 0; m < order; ++m) falling *= static_cast<double>(k - m);
    d.coefficients.push_back(falling * coefficients[k]);
  }
  return d;
}

WignerField compute_wigner(std::span<const cplx> psi, const PhaseGrid& grid, double hbar) {
  grid.validate();
  require(hbar > 0.0, "compute_wigner: hbar must be > 0");
  require(psi.size() == grid.nx, "compute_wigner: psi must be sampled on the grid's x axis");
  const double dx = grid.dx();
  // The y lattice has spacing 2 dx, so W is periodic in p with period pi hbar / dx.
  require(grid.p_max - grid.p_min < kPi * hbar / dx,
          "compute_wigner: momentum window exceeds the pi*hbar/dx alias period");

  double norm = 0.0;
  for (std::size_t i = 0; i < grid.nx; ++i) norm += trap(i, grid.nx) * std::norm(psi[i]);
  norm *= dx;
  if (std::abs(norm - 1.0) > 1e-6) {
    std::ostringstream os;
    os << "compute_wigner: wavefunction norm is " << norm << ", expected 1 within 1e-6";
    throw InvalidState(os.str());
  }

  WignerField w = blank_like(grid, hbar);
  const std::size_t nx = grid.nx;
  std::vector<cplx> pairs;
  for (std::size_t i = 0; i < nx; ++i) {
    // pairs[k] = psi(x + k dx) psi*(x - k dx); the -k term is its conjugate.
    const std::size_t kmax = std::min(i, nx - 1 - i);
    pairs.resize(kmax + 1);
    for (std::size_t k = 0; k <= kmax; ++k) pairs[k] = psi[i + k] * std::conj(psi[i - k]);
    for (std::size_t j = 0; j < grid.np; ++j) {
      const cplx step = std::polar(1.0, -2.0 * grid.p(j) * dx / hbar);
      cplx phase = step;
      double acc = pairs[0].real();
      for (std::size_t k = 1; k <= kmax; ++k) {
        acc += 2.0 * (phase * pairs[k]).real();
        phase *= step;
      }
      w.at(i, j) = acc * dx / (kPi * hbar);
    }
  }
  return w;
}

WignerField gaussian_wigner(double x_mean, double p_mean, double sigma_x, double sigma_p,
                            const PhaseGrid& grid, double hbar) {
  grid.validate();
  require(hbar > 0.0, "gaussian_wigner: hbar must be > 0");
  require(sigma_x > 0.0 && sigma_p > 0.0, "gaussian_wigner: widths must be > 0");
  if (sigma_x * sigma_p < 0.5 * hbar * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "gaussian_wigner: sigma_x*sigma_p = " << sigma_x * sigma_p << " is below hbar/2 = "
       << 0.5 * hbar;
    throw InvalidState(os.str());
  }
  WignerField w = blank_like(grid, hbar);
  const double norm = 1.0 / (2.0 * kPi * sigma_x * sigma_p);
  for (std::size_t i = 0; i < grid.nx; ++i) {
    const double ux = (grid.x(i) - x_mean) / sigma_x;
    for (std::size_t j = 0; j < grid.np; ++j) {
      const double up = (grid.p(j) - p_mean) / sigma_p;
      w.at(i, j) = norm * std::exp(-0.5 * (ux * ux + up * up));
    }
  }
  return w;
}

WignerField quantum_correction(const Potential& potential, const WignerField& field) {
  const std::size_t degree = potential.degree();
  for (std::size_t order = 3; order <= degree; order += 2) {
    if (!potential.derivative(order).is_zero()) {
      throw UnsupportedPotential("quantum_correction: potential of degree " +
                                 std::to_string(degree) +
                                 " has a non-vanishing odd derivative of order >= 3");
    }
  }
  // Even-degree polynomials above 2 still carry odd derivatives (order degree-1).
  if (degree > 2) {
    throw UnsupportedPotential("quantum_correction: only potentials of degree <= 2 are supported");
  }
  return blank_like(field.grid, field.hbar, field.time);
}

WignerField quantum_correction(cplx quadratic_coefficient, const WignerField& field) {
  return quantum_correction(Potential::quadratic(quadratic_coefficient), field);
}

double courant_number(const PhaseGrid& grid, const CrystalParams& params, double dt) {
  const double vx = std::max(std::abs(grid.p_min), std::abs(grid.p_max)) / params.m_tot;
  const double vp = std::abs(params.force_constant()) *
                    std::max(std::abs(grid.x_min - params.x0), std::abs(grid.x_max - params.x0));
  return dt * (vx / grid.dx() + vp / grid.dp());
}

cplx total_mass(const WignerField& field) {
  const PhaseGrid& g = field.grid;
  cplx acc{};
  for (std::size_t i = 0; i < g.nx; ++i) {
    cplx row{};
    for (std::size_t j = 0; j < g.np; ++j) row += trap(j, g.np) * field.at(i, j);
    acc += trap(i, g.nx) * row;
  }
  return acc * g.dx() * g.dp();
}

WignerEvolution evolve_wigner(const WignerField& field, const CrystalParams& params, double dt,
                              std::size_t steps, const EvolveOptions& options) {
  field.grid.validate();
  params.validate();
  require(std::isfinite(dt) && dt > 0.0, "evolve_wigner: dt must be > 0");
  require(field.values.size() == field.grid.size(), "evolve_wigner: field/grid size mismatch");
  const double courant = courant_number(field.grid, params, dt);
  if (courant > options.cfl_limit) {
    std::ostringstream os;
    os << "evolve_wigner: Courant number " << courant << " exceeds " << options.cfl_limit
       << "; reduce dt below " << dt * options.cfl_limit / courant;
    throw StabilityError(os.str());
  }

  WignerEvolution result;
  result.field = field;
  std::vector<cplx>& u = result.field.values;
  const TransportOperator op(field.grid, params, options);
  const std::size_t n = u.size();
  std::vector<cplx> k(n);
  std::vector<cplx> stage1(n);
  std::vector<cplx> stage2(n);
  const double start_mass = total_mass(field).real();
  bool warned = false;

  for (std::size_t s = 0; s < steps; ++s) {
    const double before = total_mass(result.field).real();
    op.apply(u, k);
    for (std::size_t m = 0; m < n; ++m) stage1[m] = u[m] + dt * k[m];
    op.apply(stage1, k);
    for (std::size_t m = 0; m < n; ++m) stage2[m] = 0.75 * u[m] + 0.25 * (stage1[m] + dt * k[m]);
    op.apply(stage2, k);
    for (std::size_t m = 0; m < n; ++m) {
      u[m] = (1.0 / 3.0) * u[m] + (2.0 / 3.0) * (stage2[m] + dt * k[m]);
    }
    result.field.time += dt;
    for (std::size_t m = 0; m < n; ++m) {
      if (!std::isfinite(u[m].real()) || !std::isfinite(u[m].imag())) {
        throw NumericBlowup("evolve_wigner: non-finite Wigner value", s);
      }
    }
    if (options.mode == WignerMode::kRealEffective || params.force_constant() == 0.0) {
      if (start_mass != 0.0) {
        result.outflow_fraction += (before - total_mass(result.field).real()) / start_mass;
      }
    }
    if (options.renormalize && options.mode == WignerMode::kAsWrittenComplex) {
      const cplx total = total_mass(result.field);
      if (total == cplx{}) throw SolverBlowup("evolve_wigner: total mass vanished");
      for (auto& v : u) v /= total;
    }
    if (!warned && std::abs(result.outflow_fraction) > 1e-3) {
      warned = true;
      std::ostringstream os;
      os << "grid too small: boundary outflow reached " << result.outflow_fraction
         << " of the initial mass at t = " << result.field.time;
      result.warnings.push_back(os.str());
    }
  }
  return result;
}

Marginals marginals(const WignerField& field) {
  const PhaseGrid& g = field.grid;
  Marginals m;
  m.position.assign(g.nx, 0.0);
  m.momentum.assign(g.np, 0.0);
  std::vector<double> imag_x(g.nx, 0.0);
  std::vector<double> imag_p(g.np, 0.0);
  const double dx = g.dx();
  const double dp = g.dp();
  for (std::size_t i = 0; i < g.nx; ++i) {
    for (std::size_t j = 0; j < g.np; ++j) {
      const cplx w = field.at(i, j);
      m.position[i] += trap(j, g.np) * dp * w.real();
      imag_x[i] += trap(j, g.np) * dp * w.imag();
      m.momentum[j] += trap(i, g.nx) * dx * w.real();
      imag_p[j] += trap(i, g.nx) * dx * w.imag();
    }
  }
  for (double v : imag_x) m.imag_residual = std::max(m.imag_residual, std::abs(v));
  for (double v : imag_p) m.imag_residual = std::max(m.imag_residual, std::abs(v));
  return m;
}

Widths localization_widths(const WignerField& field) {
  const PhaseGrid& g = field.grid;
  double mass = 0.0;
  double sx = 0.0;
  double sp = 0.0;
  for (std::size_t i = 0; i < g.nx; ++i) {
    for (std::size_t j = 0; j < g.np; ++j) {
      const double w = trap(i, g.nx) * trap(j, g.np) * std::abs(field.at(i, j));
      mass += w;
      sx += w * g.x(i);
      sp += w * g.p(j);
    }
  }
  if (!(mass > 0.0)) throw InvalidState("localization_widths: field has no weight");
  Widths out;
  out.centroid_x = sx / mass;
  out.centroid_p = sp / mass;
  double vx = 0.0;
  double vp = 0.0;
  for (std::size_t i = 0; i < g.nx; ++i) {
    const double ddx = g.x(i) - out.centroid_x;
    for (std::size_t j = 0; j < g.np; ++j) {
      const double ddp = g.p(j) - out.centroid_p;
      const double w = trap(i, g.nx) * trap(j, g.np) * std::abs(field.at(i, j));
      vx += w * ddx * ddx;
      vp += w * ddp * ddp;
    }
  }
  out.sigma_x = std::sqrt(vx / mass);
  out.sigma_p = std::sqrt(vp / mass);
  return out;
}

std::vector<LimitRow> limit_experiment(LimitOrder order, std::span<const double> eps_sequence,
                                       std::span<const double> n_sequence,
                                       const CrystalParams& base, const WignerField& field0,
                                       double dt, double t_end) {
  require(!eps_sequence.empty() && !n_sequence.empty(),
          "limit_experiment: sequences must be non-empty");
  for (std::size_t k = 1; k < eps_sequence.size(); ++k) {
    require(eps_sequence[k] <= eps_sequence[k - 1], "limit_experiment: eps must be decreasing");
  }
  for (std::size_t k = 1; k < n_sequence.size(); ++k) {
    require(n_sequence[k] >= n_sequence[k - 1], "limit_experiment: N must be increasing");
  }
  require(std::isfinite(dt) && dt > 0.0, "limit_experiment: dt must be > 0");
  require(std::isfinite(t_end) && t_end >= 0.0, "limit_experiment: t_end must be >= 0");

  const std::vector<double> rho_p0 = marginals(field0).momentum;
  EvolveOptions options;
  options.mode = WignerMode::kRealEffective;

  auto run_row = [&](double eps, double n) {
    CrystalParams params = base;
    params.epsilon = eps;
    params.n_order = n;
    params.validate();
    // Largest stable step not above dt that lands exactly on t_end.
    const double unit = courant_number(field0.grid, params, 1.0);
    const double dt_max = unit > 0.0 ? std::min(dt, options.cfl_limit / unit) : dt;
    const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt_max - 1e-9));
    const double h = steps > 0 ? t_end / static_cast<double>(steps) : dt;
    const WignerEvolution evo = evolve_wigner(field0, params, h, steps, options);
    const Widths widths = localization_widths(evo.field);
    const std::vector<double> rho_p = marginals(evo.field).momentum;
    double change = 0.0;
    for (std::size_t j = 0; j < rho_p.size(); ++j) {
      change = std::max(change, std::abs(rho_p[j] - rho_p0[j]));
    }
    return LimitRow{eps, n, widths.sigma_x, widths.sigma_p, widths.centroid_x, change};
  };

  std::vector<LimitRow> rows;
  if (order == LimitOrder::kEpsFirst) {
    for (double n : n_sequence) {
      for (double eps : eps_sequence) rows.push_back(run_row(eps, n));
    }
  } else {
    for (double eps : eps_sequence) {
      for (double n : n_sequence) rows.push_back(run_row(eps, n));
    }
  }
  return rows;
}

}  // namespace suvlab
