#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "suvlab/config.hpp"

namespace suvlab {

// One statistical or numerical acceptance check performed during a run.
struct Gate {
  std::string name;
  double expected = 0.0;
  double empirical = 0.0;
  // Test statistic compared against the threshold (z-score, relative error, ...).
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct OutputFile {
  std::string name;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string version;
  Subcommand subcommand = Subcommand::kEnsemble;
  std::uint64_t seed = 0;
  std::string started_utc;
  std::string finished_utc;
  std::string resolved_config;
  std::vector<OutputFile> files;
  std::vector<Gate> gates;
  std::vector<std::string> warnings;

  bool all_gates_pass() const;
};

std::string version();

// Dispatches to the owning module, writes tables, summary.json,
// resolved_config.toml and finally manifest.json into cfg.output_dir.
RunManifest run(const RunConfig& cfg);

// 0 when every gate passed, 1 otherwise.
int exit_code(const RunManifest& manifest);

}  // namespace suvlab
