#include "suvlab/config.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>

#include <toml.hpp>

#include "suvlab/errors.hpp"

namespace suvlab {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError(path + ": " + message);
}

std::string join(const std::string& prefix, std::string_view key) {
  return prefix.empty() ? std::string(key) : prefix + "." + std::string(key);
}

// Accepts a plain number or a string of the form "[a*]pi[/b]".
std::optional<double> angle_from_string(const std::string& text) {
  static const std::regex pattern(
      R"(^\s*(?:([0-9.eE+-]+)\s*\*?\s*)?pi(?:\s*/\s*([0-9.eE+-]+))?\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, pattern)) return std::nullopt;
  try {
    const double a = m[1].matched ? std::stod(m[1].str()) : 1.0;
    const double b = m[2].matched ? std::stod(m[2].str()) : 1.0;
    if (b == 0.0) return std::nullopt;
    return a * kPi / b;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// Typed access into the parsed tree. Every key that is read is recorded so
// the leftovers can be reported as unknown.
class Reader {
 public:
  explicit Reader(const toml::table& root) : root_(root) {}

  bool has(const std::string& path) const { return static_cast<bool>(node(path)); }

  bool number(const std::string& path, double& out) {
    const toml::node* n = mark(path);
    if (!n) return false;
    if (auto v = n->value_exact<double>()) {
      out = *v;
    } else if (auto i = n->value_exact<std::int64_t>()) {
      out = static_cast<double>(*i);
    } else {
      fail(path, "expected a number");
    }
    if (!std::isfinite(out)) fail(path, "must be finite");
    return true;
  }

  bool angle(const std::string& path, double& out) {
    const toml::node* n = node(path);
    if (n && n->is_string()) {
      mark(path);
      const auto parsed = angle_from_string(*n->value<std::string>());
      if (!parsed) fail(path, "expected a number or an expression like \"pi/3\"");
      out = *parsed;
      return true;
    }
    return number(path, out);
  }

  template <typename Unsigned>
  bool count(const std::string& path, Unsigned& out) {
    const toml::node* n = mark(path);
    if (!n) return false;
    const auto v = n->value_exact<std::int64_t>();
    if (!v) fail(path, "expected an integer");
    if (*v < 0) fail(path, "must be >= 0");
    out = static_cast<Unsigned>(*v);
    return true;
  }

  bool flag(const std::string& path, bool& out) {
    const toml::node* n = mark(path);
    if (!n) return false;
    const auto v = n->value_exact<bool>();
    if (!v) fail(path, "expected true or false");
    out = *v;
    return true;
  }

  bool text(const std::string& path, std::string& out) {
    const toml::node* n = mark(path);
    if (!n) return false;
    const auto v = n->value_exact<std::string>();
    if (!v) fail(path, "expected a string");
    out = *v;
    return true;
  }

  bool numbers(const std::string& path, std::vector<double>& out) {
    const toml::node* n = mark(path);
    if (!n) return false;
    const toml::array* arr = n->as_array();
    if (!arr) fail(path, "expected an array of numbers");
    out.clear();
    for (std::size_t k = 0; k < arr->size(); ++k) {
      const toml::node& item = *arr->get(k);
      const std::string item_path = path + "[" + std::to_string(k) + "]";
      if (auto v = item.value_exact<double>()) {
        out.push_back(*v);
      } else if (auto i = item.value_exact<std::int64_t>()) {
        out.push_back(static_cast<double>(*i));
      } else {
        fail(item_path, "expected a number");
      }
      if (!std::isfinite(out.back())) fail(item_path, "must be finite");
    }
    return true;
  }

  // Throws for the first key in the tree that was never read.
  void reject_unknown() const { walk(root_, ""); }

 private:
  const toml::node* node(const std::string& path) const {
    const toml::node* current = &root_;
    std::size_t start = 0;
    while (true) {
      const std::size_t dot = path.find('.', start);
      const std::string key = path.substr(start, dot - start);
      const toml::table* t = current->as_table();
      if (!t) return nullptr;
      current = t->get(key);
      if (!current) return nullptr;
      if (dot == std::string::npos) return current;
      start = dot + 1;
    }
  }

  const toml::node* mark(const std::string& path) {
    const toml::node* n = node(path);
    if (n) seen_.insert(path);
    return n;
  }

  void walk(const toml::table& table, const std::string& prefix) const {
    for (const auto& [key, value] : table) {
      const std::string path = join(prefix, key.str());
      if (seen_.count(path)) continue;
      if (const toml::table* sub = value.as_table()) {
        walk(*sub, path);
      } else {
        fail(path, "unknown key");
      }
    }
  }

  const toml::table& root_;
  std::set<std::string> seen_;
};

void apply_override(toml::table& root, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("--set '" + assignment + "': expected key.path=value");
  }
  auto trim = [](std::string s) {
    const auto first = s.find_first_not_of(" \t");
    const auto last = s.find_last_not_of(" \t");
    return first == std::string::npos ? std::string() : s.substr(first, last - first + 1);
  };
  const std::string path = trim(assignment.substr(0, eq));
  const std::string raw = trim(assignment.substr(eq + 1));
  if (path.empty()) throw ConfigError("--set '" + assignment + "': empty key path");

  // The value is TOML when it parses as one; anything else is a bare string.
  toml::table holder;
  try {
    holder = toml::parse("value = " + raw);
  } catch (const toml::parse_error&) {
    holder.insert_or_assign("value", raw);
  }

  toml::table* current = &root;
  std::size_t start = 0;
  std::string walked;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) fail(path, "malformed key path");
    walked = join(walked, key);
    if (dot == std::string::npos) {
      current->insert_or_assign(key, *holder.get("value"));
      return;
    }
    toml::node* next = current->get(key);
    if (!next) {
      current->insert_or_assign(key, toml::table{});
      next = current->get(key);
    }
    current = next->as_table();
    if (!current) fail(walked, "is a value, not a table");
    start = dot + 1;
  }
}

template <typename Fn>
void checked(Fn&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void read_params(Reader& r, RunConfig& cfg) {
  r.number("params.J", cfg.params.J);
  const bool has_g = r.number("params.G", cfg.params.G);
  double ratio = 0.0;
  if (r.number("params.G_over_J", ratio)) {
    if (has_g) fail("params.G_over_J", "conflicts with params.G; give one of them");
    cfg.params.G = ratio * cfg.params.J;
  }
  r.number("params.epsilon", cfg.params.epsilon);
  r.number("params.N_order", cfg.params.n_order);
  r.number("params.omega_rabi", cfg.params.omega_rabi);
  checked([&] { cfg.params.validate(); });
}

void read_noise(Reader& r, RunConfig& cfg) {
  std::string kind = "white";
  r.text("noise.kind", kind);
  const bool has_tau = r.has("noise.tau_t");
  const bool has_xi = r.has("noise.xi");
  if (kind == "white") {
    if (has_tau) fail("noise.tau_t", "invalid for WhiteNoise");
    if (has_xi) fail("noise.xi", "invalid for WhiteNoise");
    cfg.noise = WhiteNoise{};
  } else if (kind == "ou") {
    if (has_xi) fail("noise.xi", "invalid for OrnsteinUhlenbeck");
    OrnsteinUhlenbeck ou;
    if (!r.number("noise.tau_t", ou.tau_t)) fail("noise.tau_t", "required for kind = \"ou\"");
    if (!(ou.tau_t > 0.0)) fail("noise.tau_t", "must be > 0");
    cfg.noise = ou;
  } else if (kind == "constant") {
    if (has_tau) fail("noise.tau_t", "invalid for ConstantField");
    ConstantField c;
    if (!r.number("noise.xi", c.xi)) fail("noise.xi", "required for kind = \"constant\"");
    cfg.noise = c;
  } else {
    fail("noise.kind", "expected \"white\", \"ou\" or \"constant\", got \"" + kind + "\"");
  }
}

void read_integrator(Reader& r, RunConfig& cfg) {
  IntegratorConfig& in = cfg.integrator;
  r.number("integrator.dt", in.dt);
  std::string scheme;
  if (r.text("integrator.scheme", scheme)) {
    if (scheme == "stratonovich_heun") {
      in.scheme = Scheme::kStratonovichHeun;
    } else if (scheme == "ito_euler") {
      in.scheme = Scheme::kItoEuler;
    } else {
      fail("integrator.scheme", "expected \"stratonovich_heun\" or \"ito_euler\"");
    }
  }
  r.number("integrator.max_time", in.max_time);
  r.number("integrator.pole_epsilon", in.pole_epsilon);
  r.flag("integrator.renormalize_every_step", in.renormalize_every_step);
  checked([&] { in.validate(); });
}

void read_sections(Reader& r, RunConfig& cfg) {
  r.count("ensemble.M", cfg.ensemble.M);
  r.angle("ensemble.theta0", cfg.ensemble.theta0);
  r.count("ensemble.record_every", cfg.ensemble.record_every);
  r.count("ensemble.workers", cfg.ensemble.workers);

  r.angle("trajectory.theta0", cfg.trajectory.theta0);

  r.numbers("sweep.ratios", cfg.sweep.ratios);
  r.numbers("sweep.tau_values", cfg.sweep.tau_values);
  r.numbers("sweep.rate_scales", cfg.sweep.rate_scales);

  r.angle("rabi.theta0", cfg.rabi.theta0);
  r.number("rabi.dt", cfg.rabi.dt);
  r.number("rabi.t_end", cfg.rabi.t_end);

  r.count("flowfield.points", cfg.flowfield.points);

  r.number("crystal.m_tot", cfg.crystal.m_tot);
  r.number("crystal.epsilon", cfg.crystal.epsilon);
  r.number("crystal.N_order", cfg.crystal.n_order);
  r.number("crystal.x0", cfg.crystal.x0);

  r.number("grid.x_min", cfg.grid.x_min);
  r.number("grid.x_max", cfg.grid.x_max);
  r.count("grid.nx", cfg.grid.nx);
  r.number("grid.p_min", cfg.grid.p_min);
  r.number("grid.p_max", cfg.grid.p_max);
  r.count("grid.np", cfg.grid.np);

  WignerSection& w = cfg.wigner;
  std::string mode;
  if (r.text("wigner.mode", mode)) {
    if (mode == "real_effective") {
      w.mode = WignerMode::kRealEffective;
    } else if (mode == "as_written_complex") {
      w.mode = WignerMode::kAsWrittenComplex;
    } else {
      fail("wigner.mode", "expected \"real_effective\" or \"as_written_complex\"");
    }
  }
  std::string advection;
  if (r.text("wigner.advection", advection)) {
    if (advection == "third_order_upwind") {
      w.advection = Advection::kThirdOrderUpwind;
    } else if (advection == "first_order_upwind") {
      w.advection = Advection::kFirstOrderUpwind;
    } else {
      fail("wigner.advection", "expected \"third_order_upwind\" or \"first_order_upwind\"");
    }
  }
  r.flag("wigner.renormalize", w.renormalize);
  r.number("wigner.hbar", w.hbar);
  r.number("wigner.x_mean", w.x_mean);
  r.number("wigner.p_mean", w.p_mean);
  r.number("wigner.sigma_x", w.sigma_x);
  r.number("wigner.sigma_p", w.sigma_p);
  r.number("wigner.dt", w.dt);
  r.number("wigner.t_end", w.t_end);
  r.count("wigner.snapshots", w.snapshots);

  std::string order;
  if (r.text("limits.order", order)) {
    if (order == "eps_first") {
      cfg.limits.order = LimitOrder::kEpsFirst;
    } else if (order == "n_first") {
      cfg.limits.order = LimitOrder::kNFirst;
    } else {
      fail("limits.order", "expected \"eps_first\" or \"n_first\"");
    }
  }
  r.numbers("limits.eps_values", cfg.limits.eps_values);
  r.numbers("limits.n_values", cfg.limits.n_values);
  r.number("limits.dt", cfg.limits.dt);
  r.number("limits.t_end", cfg.limits.t_end);

  std::int64_t seed = 0;
  if (r.count("run.seed", seed)) cfg.seed = static_cast<std::uint64_t>(seed);
  std::string out;
  if (r.text("run.output_dir", out)) {
    if (out.empty()) fail("run.output_dir", "must not be empty");
    cfg.output_dir = out;
  }
  std::string format;
  if (r.text("run.format", format)) {
    if (format == "csv") {
      cfg.format = OutputFormat::kCsv;
    } else if (format == "json") {
      cfg.format = OutputFormat::kJson;
    } else if (format == "both") {
      cfg.format = OutputFormat::kBoth;
    } else {
      fail("run.format", "expected \"csv\", \"json\" or \"both\"");
    }
  }
}

void require_positive(const std::string& path, double v) {
  if (!(v > 0.0)) fail(path, "must be > 0");
}

void require_nonempty(const std::string& path, const std::vector<double>& v) {
  if (v.empty()) fail(path, "must not be empty");
}

// Cross-field checks for the parts of the config the chosen subcommand uses.
void validate_for(const RunConfig& cfg) {
  const auto theta_in_range = [](const std::string& path, double theta) {
    if (!(theta >= 0.0 && theta <= kPi)) fail(path, "must lie in [0, pi]");
  };
  switch (cfg.subcommand) {
    case Subcommand::kTrajectory:
      theta_in_range("trajectory.theta0", cfg.trajectory.theta0);
      break;
    case Subcommand::kEnsemble:
    case Subcommand::kSweepGJ:
    case Subcommand::kSweepTau:
    case Subcommand::kSweepScaling: {
      if (cfg.ensemble.M < 1) fail("ensemble.M", "must be >= 1");
      if (cfg.ensemble.record_every < 1) fail("ensemble.record_every", "must be >= 1");
      theta_in_range("ensemble.theta0", cfg.ensemble.theta0);
      if (cfg.subcommand == Subcommand::kSweepGJ) {
        require_nonempty("sweep.ratios", cfg.sweep.ratios);
        for (double v : cfg.sweep.ratios) {
          if (!(v > 0.0)) fail("sweep.ratios", "entries must be > 0");
        }
      }
      if (cfg.subcommand == Subcommand::kSweepTau) {
        require_nonempty("sweep.tau_values", cfg.sweep.tau_values);
        for (double v : cfg.sweep.tau_values) require_positive("sweep.tau_values", v);
      }
      if (cfg.subcommand == Subcommand::kSweepScaling) {
        require_nonempty("sweep.rate_scales", cfg.sweep.rate_scales);
        for (double v : cfg.sweep.rate_scales) require_positive("sweep.rate_scales", v);
      }
      break;
    }
    case Subcommand::kRabi:
      require_positive("params.omega_rabi", cfg.params.omega_rabi);
      require_positive("rabi.dt", cfg.rabi.dt);
      if (cfg.rabi.t_end < 0.0) fail("rabi.t_end", "must be >= 0");
      theta_in_range("rabi.theta0", cfg.rabi.theta0);
      break;
    case Subcommand::kFlowfield:
      if (!std::holds_alternative<ConstantField>(cfg.noise)) {
        fail("noise.kind", "flowfield needs kind = \"constant\"");
      }
      if (cfg.flowfield.points < 2) fail("flowfield.points", "must be >= 2");
      break;
    case Subcommand::kWigner:
    case Subcommand::kLimits: {
      checked([&] {
        cfg.grid.validate();
        cfg.crystal.validate();
      });
      const WignerSection& w = cfg.wigner;
      require_positive("wigner.hbar", w.hbar);
      require_positive("wigner.sigma_x", w.sigma_x);
      require_positive("wigner.sigma_p", w.sigma_p);
      if (w.sigma_x * w.sigma_p < 0.5 * w.hbar * (1.0 - 1e-12)) {
        fail("wigner.sigma_p", "sigma_x * sigma_p must be >= hbar / 2");
      }
      if (cfg.subcommand == Subcommand::kWigner) {
        require_positive("wigner.dt", w.dt);
        if (w.t_end < 0.0) fail("wigner.t_end", "must be >= 0");
        if (w.snapshots < 1) fail("wigner.snapshots", "must be >= 1");
        if (w.renormalize && w.mode != WignerMode::kAsWrittenComplex) {
          fail("wigner.renormalize", "only meaningful with mode = \"as_written_complex\"");
        }
      } else {
        const LimitsSection& l = cfg.limits;
        require_nonempty("limits.eps_values", l.eps_values);
        require_nonempty("limits.n_values", l.n_values);
        for (std::size_t k = 1; k < l.eps_values.size(); ++k) {
          if (l.eps_values[k] > l.eps_values[k - 1]) {
            fail("limits.eps_values", "must be non-increasing");
          }
        }
        for (std::size_t k = 1; k < l.n_values.size(); ++k) {
          if (l.n_values[k] < l.n_values[k - 1]) fail("limits.n_values", "must be non-decreasing");
        }
        for (double v : l.eps_values) {
          if (!(v >= 0.0)) fail("limits.eps_values", "entries must be >= 0");
        }
        for (double v : l.n_values) {
          if (!(v >= 1.0)) fail("limits.n_values", "entries must be >= 1");
        }
        require_positive("limits.dt", l.dt);
        if (l.t_end < 0.0) fail("limits.t_end", "must be >= 0");
      }
      break;
    }
  }
}

RunConfig resolve(toml::table root, Subcommand subcommand,
                  const std::vector<std::string>& overrides) {
  for (const std::string& o : overrides) apply_override(root, o);
  RunConfig cfg;
  cfg.subcommand = subcommand;
  Reader r(root);
  std::string declared;
  if (r.text("subcommand", declared) && parse_subcommand(declared) != subcommand) {
    fail("subcommand", "config is for '" + declared + "' but '" + to_string(subcommand) +
                           "' was requested");
  }
  read_params(r, cfg);
  read_noise(r, cfg);
  read_integrator(r, cfg);
  read_sections(r, cfg);
  r.reject_unknown();
  validate_for(cfg);
  return cfg;
}

toml::array to_array(const std::vector<double>& values) {
  toml::array a;
  for (double v : values) a.push_back(v);
  return a;
}

}  // namespace

std::string to_string(Subcommand s) {
  switch (s) {
    case Subcommand::kTrajectory: return "trajectory";
    case Subcommand::kEnsemble: return "ensemble";
    case Subcommand::kSweepGJ: return "sweep-gj";
    case Subcommand::kSweepTau: return "sweep-tau";
    case Subcommand::kSweepScaling: return "sweep-scaling";
    case Subcommand::kRabi: return "rabi";
    case Subcommand::kFlowfield: return "flowfield";
    case Subcommand::kWigner: return "wigner";
    case Subcommand::kLimits: return "limits";
  }
  return "unknown";
}

Subcommand parse_subcommand(std::string_view name) {
  for (Subcommand s : {Subcommand::kTrajectory, Subcommand::kEnsemble, Subcommand::kSweepGJ,
                       Subcommand::kSweepTau, Subcommand::kSweepScaling, Subcommand::kRabi,
                       Subcommand::kFlowfield, Subcommand::kWigner, Subcommand::kLimits}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("subcommand: unknown '" + std::string(name) + "'");
}

std::string to_string(OutputFormat f) {
  switch (f) {
    case OutputFormat::kCsv: return "csv";
    case OutputFormat::kJson: return "json";
    case OutputFormat::kBoth: return "both";
  }
  return "both";
}

RunConfig parse_config(const std::filesystem::path& file, Subcommand subcommand,
                       const std::vector<std::string>& overrides) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError(file.string() + ": cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), subcommand, overrides, file.string());
}

RunConfig parse_config_text(std::string_view text, Subcommand subcommand,
                            const std::vector<std::string>& overrides, std::string_view source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": "
       << e.description();
    throw ConfigError(os.str());
  }
  return resolve(std::move(root), subcommand, overrides);
}

std::string to_toml(const RunConfig& cfg) {
  toml::table root;
  root.insert("subcommand", to_string(cfg.subcommand));
  root.insert("params", toml::table{{"J", cfg.params.J},
                                    {"G", cfg.params.G},
                                    {"epsilon", cfg.params.epsilon},
                                    {"N_order", cfg.params.n_order},
                                    {"omega_rabi", cfg.params.omega_rabi}});
  toml::table noise;
  if (std::holds_alternative<WhiteNoise>(cfg.noise)) {
    noise.insert("kind", "white");
  } else if (const auto* ou = std::get_if<OrnsteinUhlenbeck>(&cfg.noise)) {
    noise.insert("kind", "ou");
    noise.insert("tau_t", ou->tau_t);
  } else {
    noise.insert("kind", "constant");
    noise.insert("xi", std::get<ConstantField>(cfg.noise).xi);
  }
  root.insert("noise", std::move(noise));
  root.insert("integrator",
              toml::table{{"dt", cfg.integrator.dt},
                          {"scheme", to_string(cfg.integrator.scheme)},
                          {"max_time", cfg.integrator.max_time},
                          {"pole_epsilon", cfg.integrator.pole_epsilon},
                          {"renormalize_every_step", cfg.integrator.renormalize_every_step}});
  root.insert("ensemble",
              toml::table{{"M", static_cast<std::int64_t>(cfg.ensemble.M)},
                          {"theta0", cfg.ensemble.theta0},
                          {"record_every", static_cast<std::int64_t>(cfg.ensemble.record_every)},
                          {"workers", static_cast<std::int64_t>(cfg.ensemble.workers)}});
  root.insert("trajectory", toml::table{{"theta0", cfg.trajectory.theta0}});
  root.insert("sweep", toml::table{{"ratios", to_array(cfg.sweep.ratios)},
                                   {"tau_values", to_array(cfg.sweep.tau_values)},
                                   {"rate_scales", to_array(cfg.sweep.rate_scales)}});
  root.insert("rabi", toml::table{{"theta0", cfg.rabi.theta0},
                                  {"dt", cfg.rabi.dt},
                                  {"t_end", cfg.rabi.t_end}});
  root.insert("flowfield",
              toml::table{{"points", static_cast<std::int64_t>(cfg.flowfield.points)}});
  root.insert("crystal", toml::table{{"m_tot", cfg.crystal.m_tot},
                                     {"epsilon", cfg.crystal.epsilon},
                                     {"N_order", cfg.crystal.n_order},
                                     {"x0", cfg.crystal.x0}});
  root.insert("grid", toml::table{{"x_min", cfg.grid.x_min},
                                  {"x_max", cfg.grid.x_max},
                                  {"nx", static_cast<std::int64_t>(cfg.grid.nx)},
                                  {"p_min", cfg.grid.p_min},
                                  {"p_max", cfg.grid.p_max},
                                  {"np", static_cast<std::int64_t>(cfg.grid.np)}});
  const WignerSection& w = cfg.wigner;
  root.insert("wigner", toml::table{{"mode", to_string(w.mode)},
                                    {"advection", to_string(w.advection)},
                                    {"renormalize", w.renormalize},
                                    {"hbar", w.hbar},
                                    {"x_mean", w.x_mean},
                                    {"p_mean", w.p_mean},
                                    {"sigma_x", w.sigma_x},
                                    {"sigma_p", w.sigma_p},
                                    {"dt", w.dt},
                                    {"t_end", w.t_end},
                                    {"snapshots", static_cast<std::int64_t>(w.snapshots)}});
  root.insert("limits", toml::table{{"order", to_string(cfg.limits.order)},
                                    {"eps_values", to_array(cfg.limits.eps_values)},
                                    {"n_values", to_array(cfg.limits.n_values)},
                                    {"dt", cfg.limits.dt},
                                    {"t_end", cfg.limits.t_end}});
  root.insert("run", toml::table{{"seed", static_cast<std::int64_t>(cfg.seed)},
                                 {"output_dir", cfg.output_dir.string()},
                                 {"format", to_string(cfg.format)}});
  std::ostringstream os;
  os << toml::toml_formatter(root, toml::format_flags::none) << "\n";
  return os.str();
}

}  // namespace suvlab
