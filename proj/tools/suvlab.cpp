#include <cstdint>
#include <iostream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "suvlab/config.hpp"
#include "suvlab/errors.hpp"
#include "suvlab/runner.hpp"

namespace {

constexpr int kExitGateFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

const std::pair<const char*, const char*> kSubcommands[] = {
    {"trajectory", "Single polar-angle trajectory"},
    {"ensemble", "Monte Carlo ensemble with the Born-rule and conservation gates"},
    {"sweep-gj", "Outcome statistics across G/J ratios"},
    {"sweep-tau", "Outcome statistics across OU correlation times"},
    {"sweep-scaling", "Median collapse time across eps*N"},
    {"rabi", "Unitary Rabi evolution"},
    {"flowfield", "Drift field for a frozen noise value"},
    {"wigner", "Wigner-function transport snapshots and widths"},
    {"limits", "Ordered eps/N limit experiment"}};

std::string toml_string(const std::string& raw) {
  std::string out = "\"";
  for (char c : raw) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-state collapse dynamics and Wigner phase-space simulator", "suvlab"};
  app.set_version_flag("--version", suvlab::version());
  app.require_subcommand(1, 1);

  std::string config_file;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;

  for (const auto& [name, description] : kSubcommands) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--config", config_file, "TOML config file")->required()->check(
        CLI::ExistingFile);
    sub->add_option("--set", overrides, "Override config keys, e.g. --set noise.tau_t=0.5 ensemble.M=200")
        ->take_all();
    sub->add_option("--seed", seed, "Root seed (overrides run.seed)");
    sub->add_option("--out", out_dir, "Output directory (overrides run.output_dir)");
    sub->add_option("--format", format, "Output tables as csv, json or both")
        ->check(CLI::IsMember({"csv", "json", "both"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  suvlab::RunConfig cfg;
  try {
    if (seed) {
      if (*seed > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
        throw suvlab::ConfigError("--seed: must be <= 9223372036854775807");
      }
      overrides.push_back("run.seed=" + std::to_string(*seed));
    }
    if (out_dir) overrides.push_back("run.output_dir=" + toml_string(*out_dir));
    if (format) overrides.push_back("run.format=" + toml_string(*format));
    cfg = suvlab::parse_config(config_file, suvlab::parse_subcommand(name), overrides);
  } catch (const suvlab::ConfigError& e) {
    std::cerr << "suvlab: config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const suvlab::RunManifest manifest = suvlab::run(cfg);
    for (const auto& w : manifest.warnings) std::cerr << "suvlab: warning: " << w << "\n";
    for (const auto& g : manifest.gates) {
      std::cout << (g.pass ? "PASS " : "FAIL ") << g.name << ": empirical " << g.empirical
                << ", expected " << g.expected << ", statistic " << g.statistic
                << " (threshold " << g.threshold << ")\n";
    }
    std::cout << "wrote " << manifest.files.size() + 1 << " files to "
              << cfg.output_dir.string() << "\n";
    return manifest.all_gates_pass() ? 0 : kExitGateFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "suvlab: invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "suvlab: error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
