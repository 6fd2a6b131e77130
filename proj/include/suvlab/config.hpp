#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "suvlab/collapse.hpp"
#include "suvlab/noise.hpp"
#include "suvlab/wigner.hpp"

namespace suvlab {

enum class Subcommand {
  kTrajectory,
  kEnsemble,
  kSweepGJ,
  kSweepTau,
  kSweepScaling,
  kRabi,
  kFlowfield,
  kWigner,
  kLimits,
};

std::string to_string(Subcommand s);
// Throws ConfigError for names outside the subcommand list.
Subcommand parse_subcommand(std::string_view name);

enum class OutputFormat { kCsv, kJson, kBoth };

std::string to_string(OutputFormat f);

struct EnsembleSection {
  std::size_t M = 10000;
  double theta0 = kPi / 3.0;
  std::size_t record_every = 1000;
  unsigned workers = 0;
};

struct TrajectorySection {
  double theta0 = kPi / 3.0;
};

struct SweepSection {
  std::vector<double> ratios{0.01, 0.1, 1.0, 10.0, 100.0};
  std::vector<double> tau_values{1.0, 0.1, 0.01, 0.001};
  std::vector<double> rate_scales{1.0, 2.0, 4.0, 8.0};
};

struct RabiSection {
  double theta0 = 0.0;
  double dt = 1e-3;
  // 0 = one period 2 pi / omega_rabi.
  double t_end = 0.0;
};

struct FlowfieldSection {
  std::size_t points = 181;
};

struct WignerSection {
  WignerMode mode = WignerMode::kRealEffective;
  Advection advection = Advection::kThirdOrderUpwind;
  bool renormalize = false;
  double hbar = 1.0;
  double x_mean = 0.0;
  double p_mean = 0.0;
  double sigma_x = 1.0;
  double sigma_p = 0.5;
  // Upper bound on the step; reduced further to respect the CFL limit.
  double dt = 0.01;
  // 0 = m_tot * sigma_x / sigma_p, where the free width has grown by sqrt 2.
  double t_end = 0.0;
  std::size_t snapshots = 4;
};

struct LimitsSection {
  LimitOrder order = LimitOrder::kNFirst;
  std::vector<double> eps_values{0.125};
  std::vector<double> n_values{1.0, 4.0, 16.0};
  double dt = 0.01;
  double t_end = 0.75;
};

struct RunConfig {
  Subcommand subcommand = Subcommand::kEnsemble;
  SuvParams params;
  CrystalParams crystal;
  NoiseKind noise = WhiteNoise{};
  IntegratorConfig integrator;
  PhaseGrid grid;
  EnsembleSection ensemble;
  TrajectorySection trajectory;
  SweepSection sweep;
  RabiSection rabi;
  FlowfieldSection flowfield;
  WignerSection wigner;
  LimitsSection limits;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "suvlab_out";
  OutputFormat format = OutputFormat::kBoth;
};

// Reads a TOML file, applies `key.path=value` overrides on top of it and
// validates the result. Every error is a ConfigError naming the key path.
RunConfig parse_config(const std::filesystem::path& file, Subcommand subcommand,
                       const std::vector<std::string>& overrides = {});

// Same, from TOML text.
RunConfig parse_config_text(std::string_view text, Subcommand subcommand,
                            const std::vector<std::string>& overrides = {},
                            std::string_view source = "<config>");

// Fully resolved config as TOML; parsing it back gives an identical RunConfig.
std::string to_toml(const RunConfig& cfg);

}  // namespace suvlab
