#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "suvlab/collapse.hpp"
#include "suvlab/noise.hpp"

namespace suvlab {

struct EnsembleConfig {
  std::size_t M = 10000;
  double theta0 = kPi / 3.0;
  SuvParams params;
  NoiseKind noise = WhiteNoise{};
  IntegratorConfig integrator;
  std::uint64_t seed = 1;
  // Steps between points of the shared <sigma_z> time grid.
  std::size_t record_every = 1000;
  // 0 = SUVLAB_THREADS, falling back to the hardware thread count.
  unsigned workers = 0;

  void validate() const;
};

struct EnsembleResult {
  std::size_t count_pole0 = 0;
  std::size_t count_pole1 = 0;
  std::size_t count_unresolved = 0;
  // Collapse times of resolved trajectories, in trajectory-index order.
  std::vector<double> collapse_times;
  std::vector<double> times;
  std::vector<double> mean_sigma_z_series;
  // Standard error of the ensemble mean at each recorded time.
  std::vector<double> stderr_series;
  EnsembleConfig config_echo;

  std::size_t total() const { return count_pole0 + count_pole1 + count_unresolved; }
  std::size_t resolved() const { return count_pole0 + count_pole1; }
  // Fraction of resolved trajectories that ended at |0>.
  double empirical_p0() const;
};

struct BornTest {
  double expected_p0 = 0.0;
  double empirical_p0 = 0.0;
  double z_score = 0.0;
  double threshold = 4.0;
  bool pass = false;
};

struct ConservationReport {
  double max_deviation = 0.0;
  // Largest |mean - cos theta0| / stderr over the grid (0 where both vanish).
  double max_z = 0.0;
  double time_of_max_z = 0.0;
  double threshold = 4.0;
  bool pass = false;
};

struct RatioRow {
  double ratio;
  double empirical_p0;
  std::size_t pole0;
  std::size_t pole1;
  std::size_t unresolved;
};

struct TauRow {
  double tau_t;
  double empirical_p0;
  double born_deviation_sigma;
};

struct ScalingRow {
  double scale;
  double median_collapse_time;
};

struct ScalingResult {
  std::vector<ScalingRow> rows;
  // Least-squares fit of log(median tau_c) against log(eps * N).
  double slope = 0.0;
  double intercept = 0.0;
};

// Worker count actually used for a request of `requested` (0 = automatic).
unsigned resolve_workers(unsigned requested);

// Runs cfg.M independent trajectories. Trajectory i draws its noise from
// derive_seed(cfg.seed, i), and partial sums are combined in a fixed order,
// so the result is bit-identical for any worker count. After entering a pole
// band a trajectory contributes +-1 to every later grid point.
EnsembleResult run_ensemble(const EnsembleConfig& cfg);

// Binomial z-test of the resolved pole-0 fraction against cos^2(theta0/2).
// Throws HorizonTooShort if 1% or more of the trajectories are unresolved.
BornTest born_statistics_test(const EnsembleResult& r, double threshold = 4.0);

// max_t |mean <sigma_z>(t) - cos theta0|.
double martingale_check(const EnsembleResult& r);

// Same deviation, measured pointwise in units of the ensemble standard error.
ConservationReport statistics_conservation(const EnsembleResult& r, double threshold = 4.0);

// G = ratio * J for each ratio; point i is seeded with derive_seed(base.seed, i).
std::vector<RatioRow> gj_ratio_sweep(std::span<const double> ratios, double theta0,
                                     const EnsembleConfig& base);

std::vector<TauRow> tau_sweep(std::span<const double> tau_values, double theta0,
                              const EnsembleConfig& base);

// Scales epsilon by each factor and records the median collapse time.
ScalingResult scaling_sweep(std::span<const double> rate_scales, double theta0,
                            const EnsembleConfig& base);

}  // namespace suvlab
