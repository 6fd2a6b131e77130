#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <boost/random/normal_distribution.hpp>

namespace suvlab {

// delta-correlated field on the grid: Var(xi_k) = 1/dt.
struct WhiteNoise {};

// Stationary Ornstein-Uhlenbeck field whose autocovariance integrates to 1,
// so tau_t -> 0 recovers WhiteNoise.
struct OrnsteinUhlenbeck {
  double tau_t = 1.0;
};

// xi(t) = const; used for flow diagrams (xi = cos eta).
struct ConstantField {
  double xi = 0.0;
};

using NoiseKind = std::variant<WhiteNoise, OrnsteinUhlenbeck, ConstantField>;

std::string describe(const NoiseKind& kind);

struct NoisePath {
  double dt = 1.0;
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  std::size_t size() const { return values.size(); }
};

// Stream seed for item `index` of a run rooted at `root`. Distinct indices
// give statistically independent mt19937_64 streams.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

// Stationary OU variance on a grid of spacing dt, chosen so that
// dt * sum_k C(k dt) = 1 exactly. Equals 1/(2 tau) up to O((dt/tau)^2).
double ou_grid_variance(double dt, double tau_t);

// Sequential sampler for a NoiseKind. All NoisePath factories are thin
// wrappers around this, so streaming consumers (ensembles) and materialized
// paths see bit-identical values for the same (kind, dt, seed).
class NoiseStream {
 public:
  NoiseStream(const NoiseKind& kind, double dt, std::uint64_t seed);

  double next() {
    switch (mode_) {
      case Mode::kWhite:
        return scale_ * normal_(engine_);
      case Mode::kOrnsteinUhlenbeck:
        if (fresh_) {
          fresh_ = false;
          state_ = scale_ * normal_(engine_);
        } else {
          state_ = decay_ * state_ + kick_ * normal_(engine_);
        }
        return state_;
      case Mode::kConstant:
        break;
    }
    return state_;
  }

  double dt() const { return dt_; }

 private:
  enum class Mode { kWhite, kOrnsteinUhlenbeck, kConstant };

  Mode mode_;
  double dt_;
  double scale_ = 0.0;
  double decay_ = 0.0;
  double kick_ = 0.0;
  double state_ = 0.0;
  bool fresh_ = true;
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_;
};

NoisePath sample_white(double dt, std::size_t n, std::uint64_t seed);

// Flags dt > tau_t in NoisePath::warnings; the exact OU update is still used.
NoisePath sample_ou(double dt, std::size_t n, double tau_t, std::uint64_t seed);

NoisePath sample_constant(double xi, std::size_t n, double dt = 1.0);

NoisePath sample(const NoiseKind& kind, double dt, std::size_t n, std::uint64_t seed);

// Unbiased sample autocovariance at `lag` after removing the path mean.
double autocorrelation(const NoisePath& path, std::size_t lag);

// xi -> -xi, same dt and seed.
NoisePath negated(const NoisePath& path);

}  // namespace suvlab
