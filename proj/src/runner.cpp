#include "suvlab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <limits>

#include <json.hpp>

#include "suvlab/collapse.hpp"
#include "suvlab/ensemble.hpp"
#include "suvlab/errors.hpp"
#include "suvlab/plotdata.hpp"
#include "suvlab/wigner.hpp"

#ifndef SUVLAB_VERSION
#define SUVLAB_VERSION "0.0.0"
#endif

namespace suvlab {

namespace {

using Json = nlohmann::ordered_json;

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

Json to_json(const Gate& g) {
  return Json{{"name", g.name},
              {"expected", number(g.expected)},
              {"empirical", number(g.empirical)},
              {"statistic", number(g.statistic)},
              {"threshold", number(g.threshold)},
              {"pass", g.pass}};
}

std::int64_t as_int(std::size_t v) { return static_cast<std::int64_t>(v); }

// Everything a subcommand produces before files are written.
struct Output {
  std::vector<Table> tables;
  Json summary = Json::object();
  std::vector<Gate> gates;
  std::vector<std::string> warnings;
};

EnsembleConfig ensemble_config(const RunConfig& cfg) {
  EnsembleConfig e;
  e.M = cfg.ensemble.M;
  e.theta0 = cfg.ensemble.theta0;
  e.params = cfg.params;
  e.noise = cfg.noise;
  e.integrator = cfg.integrator;
  e.seed = cfg.seed;
  e.record_every = cfg.ensemble.record_every;
  e.workers = cfg.ensemble.workers;
  return e;
}

Output run_trajectory(const RunConfig& cfg) {
  const std::size_t steps = cfg.integrator.steps();
  const NoisePath path = sample(cfg.noise, cfg.integrator.dt, steps, derive_seed(cfg.seed, 0));
  const Trajectory traj = evolve_trajectory(BlochState{cfg.trajectory.theta0, 0.0}, cfg.params,
                                            path, cfg.integrator);
  Output out;
  out.warnings = path.warnings;
  Table t{"trajectory", {"t[s]", "theta[rad]", "xi[s^-1/2]"}, {}};
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const double xi =
        k < path.size() ? path.values[k] : std::numeric_limits<double>::quiet_NaN();
    t.add({traj.times[k], traj.thetas[k], xi});
  }
  out.tables.push_back(std::move(t));
  out.summary["outcome"] = to_string(traj.outcome);
  out.summary["collapse_time"] =
      traj.collapse_time ? Json(*traj.collapse_time) : Json(nullptr);
  out.summary["noise_seed"] = traj.noise_seed;
  out.summary["noise"] = describe(cfg.noise);
  return out;
}

Output run_ensemble_cmd(const RunConfig& cfg) {
  const EnsembleResult r = run_ensemble(ensemble_config(cfg));
  Output out;
  Table series{"ensemble_series", {"t[s]", "mean_sigma_z[1]", "stderr[1]"}, {}};
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    series.add({r.times[k], r.mean_sigma_z_series[k], r.stderr_series[k]});
  }
  Table outcomes{"outcomes", {"outcome", "count"}, {}};
  outcomes.add({std::string("pole0"), as_int(r.count_pole0)});
  outcomes.add({std::string("pole1"), as_int(r.count_pole1)});
  outcomes.add({std::string("unresolved"), as_int(r.count_unresolved)});
  Table times{"collapse_times", {"rank", "collapse_time[s]"}, {}};
  for (std::size_t k = 0; k < r.collapse_times.size(); ++k) {
    times.add({as_int(k), r.collapse_times[k]});
  }
  out.tables = {std::move(series), std::move(outcomes), std::move(times)};

  const BornTest born = born_statistics_test(r);
  const ConservationReport cons = statistics_conservation(r);
  out.gates.push_back(Gate{"born_rule", born.expected_p0, born.empirical_p0,
                           std::abs(born.z_score), born.threshold, born.pass});
  out.gates.push_back(Gate{"statistics_conservation", std::cos(cfg.ensemble.theta0),
                           std::cos(cfg.ensemble.theta0) + cons.max_deviation, cons.max_z,
                           cons.threshold, cons.pass});
  out.summary["M"] = as_int(r.total());
  out.summary["theta0"] = cfg.ensemble.theta0;
  out.summary["noise"] = describe(cfg.noise);
  out.summary["counts"] = Json{{"pole0", as_int(r.count_pole0)},
                               {"pole1", as_int(r.count_pole1)},
                               {"unresolved", as_int(r.count_unresolved)}};
  out.summary["born_test"] = Json{{"expected_p0", born.expected_p0},
                                  {"empirical_p0", born.empirical_p0},
                                  {"z_score", number(born.z_score)},
                                  {"threshold", born.threshold},
                                  {"pass", born.pass}};
  out.summary["statistics_conservation"] = Json{{"max_deviation", cons.max_deviation},
                                                {"max_z", number(cons.max_z)},
                                                {"time_of_max_z", cons.time_of_max_z},
                                                {"threshold", cons.threshold},
                                                {"pass", cons.pass}};
  return out;
}

Output run_sweep_gj(const RunConfig& cfg) {
  const auto rows = gj_ratio_sweep(cfg.sweep.ratios, cfg.ensemble.theta0, ensemble_config(cfg));
  Output out;
  Table t{"sweep_gj", {"G_over_J[1]", "p0_hat[1]", "pole0", "pole1", "unresolved"}, {}};
  Json points = Json::array();
  for (const RatioRow& row : rows) {
    t.add({row.ratio, row.empirical_p0, as_int(row.pole0), as_int(row.pole1),
           as_int(row.unresolved)});
    points.push_back(Json{{"G_over_J", row.ratio}, {"p0_hat", number(row.empirical_p0)}});
  }
  out.tables.push_back(std::move(t));
  out.summary["theta0"] = cfg.ensemble.theta0;
  out.summary["born_p0"] = std::pow(std::cos(0.5 * cfg.ensemble.theta0), 2);
  out.summary["points"] = std::move(points);
  return out;
}

Output run_sweep_tau(const RunConfig& cfg) {
  const auto rows = tau_sweep(cfg.sweep.tau_values, cfg.ensemble.theta0, ensemble_config(cfg));
  Output out;
  Table t{"sweep_tau", {"tau_t[s]", "p0_hat[1]", "born_deviation[sigma]"}, {}};
  Json points = Json::array();
  for (const TauRow& row : rows) {
    t.add({row.tau_t, row.empirical_p0, row.born_deviation_sigma});
    points.push_back(Json{{"tau_t", row.tau_t},
                          {"p0_hat", number(row.empirical_p0)},
                          {"born_deviation_sigma", number(row.born_deviation_sigma)}});
  }
  out.tables.push_back(std::move(t));
  out.summary["theta0"] = cfg.ensemble.theta0;
  out.summary["born_p0"] = std::pow(std::cos(0.5 * cfg.ensemble.theta0), 2);
  out.summary["points"] = std::move(points);
  return out;
}

Output run_sweep_scaling(const RunConfig& cfg) {
  const ScalingResult r =
      scaling_sweep(cfg.sweep.rate_scales, cfg.ensemble.theta0, ensemble_config(cfg));
  Output out;
  Table t{"scaling", {"rate_scale[1]", "eps_N[1]", "median_collapse_time[s]"}, {}};
  for (const ScalingRow& row : r.rows) {
    t.add({row.scale, row.scale * cfg.params.rate_scale(), row.median_collapse_time});
  }
  out.tables.push_back(std::move(t));
  out.summary["slope"] = number(r.slope);
  out.summary["intercept"] = number(r.intercept);
  // Collapse is deterministic without noise, where tau_c is exactly proportional to 1/(eps N).
  if (cfg.params.G == 0.0) {
    const double err = std::abs(r.slope + 1.0);
    out.gates.push_back(Gate{"collapse_time_scaling", -1.0, r.slope, err, 0.05, err <= 0.05});
  }
  return out;
}

Output run_rabi(const RunConfig& cfg) {
  const double omega = cfg.params.omega_rabi;
  const double period = 2.0 * kPi / omega;
  const double t_end = cfg.rabi.t_end > 0.0 ? cfg.rabi.t_end : period;
  const StateVector v0 = to_state_vector(BlochState{cfg.rabi.theta0, 0.0});
  const std::vector<StateVector> states = rabi_evolution(v0, omega, cfg.rabi.dt, t_end);
  Output out;
  Table t{"rabi", {"t[s]", "theta[rad]", "phi[rad]", "sigma_z[1]", "norm_deviation[1]"}, {}};
  double max_step_drift = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const double time = std::min(static_cast<double>(k) * cfg.rabi.dt, t_end);
    const BlochState b = from_state_vector(states[k]);
    const double dev = states[k].norm_squared() - 1.0;
    if (k > 0) {
      max_step_drift = std::max(
          max_step_drift, std::abs(states[k].norm_squared() - states[k - 1].norm_squared()));
    }
    t.add({time, b.theta, b.phi, sigma_z_expectation(states[k]), dev});
  }
  out.tables.push_back(std::move(t));
  out.gates.push_back(
      Gate{"norm_per_step", 0.0, max_step_drift, max_step_drift, 1e-12, max_step_drift <= 1e-12});
  const double periods = t_end / period;
  if (std::abs(periods - std::round(periods)) < 1e-12 && periods >= 0.5) {
    const double f = fidelity(v0, states.back());
    out.gates.push_back(Gate{"period_return_fidelity", 1.0, f, 1.0 - f, 1e-10, 1.0 - f < 1e-10});
  }
  out.summary["omega_rabi"] = omega;
  out.summary["period"] = period;
  out.summary["t_end"] = t_end;
  out.summary["max_norm_step_drift"] = max_step_drift;
  return out;
}

Output run_flowfield(const RunConfig& cfg) {
  const double xi = std::get<ConstantField>(cfg.noise).xi;
  const double J = cfg.params.effective_J();
  const double G = cfg.params.effective_G();
  std::vector<double> grid(cfg.flowfield.points);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    grid[k] = kPi * static_cast<double>(k) / static_cast<double>(grid.size() - 1);
  }
  Output out;
  Table t{"flowfield", {"theta[rad]", "dtheta_dt[s^-1]"}, {}};
  for (const FlowSample& s : flow_field(grid, xi, J, G)) t.add({s.theta, s.dtheta_dt});
  out.tables.push_back(std::move(t));
  const FixedPointReport fp = classify_fixed_points(xi, J, G);
  out.summary["xi"] = xi;
  out.summary["attractive"] = fp.attractive;
  out.summary["repulsive"] = fp.repulsive;
  return out;
}

Table snapshot_table(const WignerField& f, std::size_t index) {
  Table t{"wigner_snapshot_" + std::to_string(index),
          {"t[a.u.]", "x[a.u.]", "p[a.u.]", "W_re[a.u.]", "W_im[a.u.]"},
          {}};
  t.rows.reserve(f.grid.size());
  for (std::size_t i = 0; i < f.grid.nx; ++i) {
    for (std::size_t j = 0; j < f.grid.np; ++j) {
      const cplx w = f.at(i, j);
      t.add({f.time, f.grid.x(i), f.grid.p(j), w.real(), w.imag()});
    }
  }
  return t;
}

Output run_wigner(const RunConfig& cfg) {
  const WignerSection& w = cfg.wigner;
  const double t_end = w.t_end > 0.0 ? w.t_end : cfg.crystal.m_tot * w.sigma_x / w.sigma_p;
  WignerField field = gaussian_wigner(w.x_mean, w.p_mean, w.sigma_x, w.sigma_p, cfg.grid, w.hbar);
  EvolveOptions options;
  options.mode = w.mode;
  options.advection = w.advection;
  options.renormalize = w.renormalize;

  const double unit = courant_number(cfg.grid, cfg.crystal, 1.0);
  const double dt_max = unit > 0.0 ? std::min(w.dt, options.cfl_limit / unit) : w.dt;
  const double segment = t_end / static_cast<double>(w.snapshots);
  const auto steps = static_cast<std::size_t>(std::ceil(segment / dt_max - 1e-9));
  const double h = steps > 0 ? segment / static_cast<double>(steps) : w.dt;
  const bool free = cfg.crystal.force_constant() == 0.0;

  Output out;
  Table widths{"wigner_widths",
               {"t[a.u.]", "sigma_x[a.u.]", "sigma_p[a.u.]", "centroid_x[a.u.]",
                "centroid_p[a.u.]", "mass_re[1]", "mass_im[1]", "sigma_x_free[a.u.]"},
               {}};
  auto record = [&](const WignerField& f) {
    const Widths wd = localization_widths(f);
    const cplx mass = total_mass(f);
    const double tt = f.time * w.sigma_p / cfg.crystal.m_tot;
    const double analytic = std::sqrt(w.sigma_x * w.sigma_x + tt * tt);
    widths.add({f.time, wd.sigma_x, wd.sigma_p, wd.centroid_x, wd.centroid_p, mass.real(),
                mass.imag(), analytic});
    return wd;
  };
  record(field);
  out.tables.push_back(snapshot_table(field, 0));
  double outflow = 0.0;
  Widths last{};
  for (std::size_t s = 1; s <= w.snapshots; ++s) {
    WignerEvolution evo = evolve_wigner(field, cfg.crystal, h, steps, options);
    // Pin the clock to the exact snapshot time rather than the accumulated sum.
    evo.field.time = segment * static_cast<double>(s);
    field = std::move(evo.field);
    outflow += evo.outflow_fraction;
    for (auto& warning : evo.warnings) out.warnings.push_back(std::move(warning));
    last = record(field);
    out.tables.push_back(snapshot_table(field, s));
  }
  out.tables.insert(out.tables.begin(), std::move(widths));

  if (free && w.mode == WignerMode::kRealEffective) {
    const double tt = t_end * w.sigma_p / cfg.crystal.m_tot;
    const double expected = w.sigma_x * w.sigma_x + tt * tt;
    const double empirical = last.sigma_x * last.sigma_x;
    const double rel = std::abs(empirical / expected - 1.0);
    out.gates.push_back(Gate{"free_spreading_variance", expected, empirical, rel, 0.01, rel < 0.01});
  }
  out.summary["t_end"] = t_end;
  out.summary["dt"] = h;
  out.summary["steps_per_snapshot"] = as_int(steps);
  out.summary["courant"] = courant_number(cfg.grid, cfg.crystal, h);
  out.summary["mode"] = to_string(w.mode);
  out.summary["advection"] = to_string(w.advection);
  out.summary["outflow_fraction"] = outflow;
  out.summary["final_widths"] = Json{{"sigma_x", last.sigma_x},
                                     {"sigma_p", last.sigma_p},
                                     {"centroid_x", last.centroid_x},
                                     {"centroid_p", last.centroid_p}};
  return out;
}

Output run_limits(const RunConfig& cfg) {
  const WignerSection& w = cfg.wigner;
  const LimitsSection& l = cfg.limits;
  const WignerField field0 =
      gaussian_wigner(w.x_mean, w.p_mean, w.sigma_x, w.sigma_p, cfg.grid, w.hbar);
  const auto rows =
      limit_experiment(l.order, l.eps_values, l.n_values, cfg.crystal, field0, l.dt, l.t_end);
  Output out;
  Table t{"limits",
          {"eps[1]", "N[1]", "sigma_x_eff[a.u.]", "sigma_p_eff[a.u.]", "centroid_x[a.u.]",
           "momentum_marginal_change[a.u.]"},
          {}};
  for (const LimitRow& r : rows) {
    t.add({r.eps, r.n_order, r.sigma_x_eff, r.sigma_p_eff, r.centroid_x,
           r.momentum_marginal_change});
  }
  out.tables.push_back(std::move(t));

  // Trend gates along the inner sequence of each outer block.
  const std::size_t inner = l.order == LimitOrder::kEpsFirst ? l.eps_values.size()
                                                              : l.n_values.size();
  const double cell = cfg.grid.dx();
  bool monotone = true;
  double worst_centroid = 0.0;
  double worst_marginal = 0.0;
  for (std::size_t block = 0; block + inner <= rows.size(); block += inner) {
    for (std::size_t k = block + 1; k < block + inner; ++k) {
      const double prev = rows[k - 1].sigma_x_eff;
      const double cur = rows[k].sigma_x_eff;
      if (l.order == LimitOrder::kNFirst ? cur > prev : cur < prev) monotone = false;
    }
    const LimitRow& end = rows[block + inner - 1];
    worst_centroid = std::max(worst_centroid, std::abs(end.centroid_x - cfg.crystal.x0));
    worst_marginal = std::max(worst_marginal, end.momentum_marginal_change);
  }
  if (l.order == LimitOrder::kNFirst) {
    out.gates.push_back(Gate{"centroid_at_x0", cfg.crystal.x0, cfg.crystal.x0 + worst_centroid,
                             worst_centroid / cell, 2.0, worst_centroid <= 2.0 * cell});
    out.gates.push_back(
        Gate{"sigma_x_shrinks", 0.0, monotone ? 0.0 : 1.0, monotone ? 0.0 : 1.0, 0.0, monotone});
  } else {
    out.gates.push_back(Gate{"momentum_marginal_unchanged", 0.0, worst_marginal, worst_marginal,
                             1e-4, worst_marginal <= 1e-4});
    out.gates.push_back(
        Gate{"sigma_x_grows", 0.0, monotone ? 0.0 : 1.0, monotone ? 0.0 : 1.0, 0.0, monotone});
  }
  out.summary["order"] = to_string(l.order);
  out.summary["grid_cell_dx"] = cell;
  out.summary["rows"] = as_int(rows.size());
  return out;
}

Output dispatch(const RunConfig& cfg) {
  switch (cfg.subcommand) {
    case Subcommand::kTrajectory: return run_trajectory(cfg);
    case Subcommand::kEnsemble: return run_ensemble_cmd(cfg);
    case Subcommand::kSweepGJ: return run_sweep_gj(cfg);
    case Subcommand::kSweepTau: return run_sweep_tau(cfg);
    case Subcommand::kSweepScaling: return run_sweep_scaling(cfg);
    case Subcommand::kRabi: return run_rabi(cfg);
    case Subcommand::kFlowfield: return run_flowfield(cfg);
    case Subcommand::kWigner: return run_wigner(cfg);
    case Subcommand::kLimits: return run_limits(cfg);
  }
  throw ConfigError("subcommand: not dispatchable");
}

}  // namespace

bool RunManifest::all_gates_pass() const {
  return std::all_of(gates.begin(), gates.end(), [](const Gate& g) { return g.pass; });
}

std::string version() { return SUVLAB_VERSION; }

RunManifest run(const RunConfig& cfg) {
  RunManifest m;
  m.version = version();
  m.subcommand = cfg.subcommand;
  m.seed = cfg.seed;
  m.started_utc = utc_now();
  m.resolved_config = to_toml(cfg);

  const std::filesystem::path dir = cfg.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

  Output out = dispatch(cfg);
  m.gates = out.gates;
  m.warnings = out.warnings;

  std::vector<std::string> names = emit_plotdata(out.tables, cfg.format, dir);
  Json summary;
  summary["subcommand"] = to_string(cfg.subcommand);
  summary["seed"] = cfg.seed;
  summary["version"] = m.version;
  for (auto& [key, value] : out.summary.items()) summary[key] = value;
  Json gates = Json::array();
  for (const Gate& g : m.gates) gates.push_back(to_json(g));
  summary["gates"] = std::move(gates);
  summary["all_gates_pass"] = m.all_gates_pass();
  summary["warnings"] = m.warnings;
  write_file(dir, "summary.json", summary.dump(1) + "\n");
  names.push_back("summary.json");
  write_file(dir, "resolved_config.toml", m.resolved_config);
  names.push_back("resolved_config.toml");

  for (const std::string& name : names) {
    m.files.push_back(OutputFile{name, std::filesystem::file_size(dir / name)});
  }
  m.finished_utc = utc_now();

  Json manifest;
  manifest["tool"] = "suvlab";
  manifest["version"] = m.version;
  manifest["subcommand"] = to_string(m.subcommand);
  manifest["seed"] = m.seed;
  manifest["started_utc"] = m.started_utc;
  manifest["finished_utc"] = m.finished_utc;
  manifest["workers"] = resolve_workers(cfg.ensemble.workers);
  manifest["resolved_config"] = m.resolved_config;
  Json files = Json::array();
  for (const OutputFile& f : m.files) files.push_back(Json{{"name", f.name}, {"bytes", f.bytes}});
  manifest["files"] = std::move(files);
  Json manifest_gates = Json::array();
  for (const Gate& g : m.gates) manifest_gates.push_back(to_json(g));
  manifest["gates"] = std::move(manifest_gates);
  manifest["all_gates_pass"] = m.all_gates_pass();
  manifest["warnings"] = m.warnings;
  write_file(dir, "manifest.json", manifest.dump(1) + "\n");
  return m;
}

int exit_code(const RunManifest& manifest) { return manifest.all_gates_pass() ? 0 : 1; }

}  // namespace suvlab
