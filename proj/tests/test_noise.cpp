#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "suvlab/bloch.hpp"
#include "suvlab/noise.hpp"

using namespace suvlab;
using doctest::Approx;

namespace {

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("white noise mean and variance follow 1/dt") {
  const NoisePath path = sample_white(1e-3, 1'000'000, 2024);
  CHECK(std::abs(mean(path.values)) < 4.0 * std::sqrt(1.0 / 1e-3) / 1e3);
  CHECK(autocorrelation(path, 0) == Approx(1000.0).epsilon(0.01));
}

TEST_CASE("white noise variance scales as 1/dt") {
  for (double dt : {1e-2, 1e-3, 1e-4}) {
    const NoisePath path = sample_white(dt, 1'000'000, 5);
    CHECK(autocorrelation(path, 0) * dt == Approx(1.0).epsilon(0.02));
  }
}

TEST_CASE("white noise lags are uncorrelated") {
  const double dt = 1e-3;
  const std::size_t n = 1'000'000;
  const NoisePath path = sample_white(dt, n, 99);
  const double se = (1.0 / dt) / std::sqrt(static_cast<double>(n));
  for (std::size_t lag : {1u, 2u, 7u, 50u}) {
    CHECK(std::abs(autocorrelation(path, lag)) < 4.0 * se);
  }
}

TEST_CASE("identical arguments give identical paths") {
  const NoisePath a = sample_white(1e-3, 10'000, 42);
  const NoisePath b = sample_white(1e-3, 10'000, 42);
  CHECK(a.values == b.values);
  CHECK(a.seed == 42);
  const NoisePath c = sample_white(1e-3, 10'000, 43);
  CHECK(a.values != c.values);
  const NoisePath o1 = sample_ou(1e-3, 5000, 0.2, 42);
  const NoisePath o2 = sample_ou(1e-3, 5000, 0.2, 42);
  CHECK(o1.values == o2.values);
}

TEST_CASE("streaming and materialized samples agree") {
  const NoiseKind kind = OrnsteinUhlenbeck{0.3};
  const NoisePath path = sample(kind, 1e-3, 1000, 8);
  NoiseStream stream(kind, 1e-3, 8);
  for (double v : path.values) CHECK(stream.next() == v);
}

TEST_CASE("derived seeds are distinct across indices") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(derive_seed(1, i));
  CHECK(seen.size() == 10000);
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(1, 5) == derive_seed(1, 5));
}

TEST_CASE("OU autocorrelation decays as exp(-lag/tau)") {
  const double dt = 1e-3;
  const double tau = 0.1;
  const NoisePath path = sample_ou(dt, 1'000'000, tau, 17);
  const auto lag = static_cast<std::size_t>(std::lround(tau / dt));
  const double ratio = autocorrelation(path, lag) / autocorrelation(path, 0);
  CHECK(ratio == Approx(std::exp(-1.0)).epsilon(0.05));
}

TEST_CASE("OU stationary variance is 1/(2 tau)") {
  const NoisePath path = sample_ou(1e-2, 1'000'000, 0.5, 3);
  CHECK(autocorrelation(path, 0) == Approx(1.0).epsilon(0.02));
}

TEST_CASE("OU grid variance integrates to the white-noise normalization") {
  const double dt = 1e-4;
  for (double tau : {1.0, 0.1, 0.01, 1e-3, 1e-4}) {
    const double var = ou_grid_variance(dt, tau);
    const double decay = std::exp(-dt / tau);
    // dt * sum over all lags of var * decay^|k|.
    const double integrated = dt * var * (1.0 + decay) / (1.0 - decay);
    CHECK(integrated == Approx(1.0).epsilon(1e-12));
    if (tau >= 100 * dt) CHECK(var == Approx(1.0 / (2.0 * tau)).epsilon(1e-4));
  }
  // tau = dt has the white-noise lag-0 variance up to tanh(1/2).
  CHECK(ou_grid_variance(dt, dt) * dt == Approx(std::tanh(0.5)));
}

TEST_CASE("OU with very long correlation time is nearly frozen") {
  const double tau = 1e4;
  const NoisePath path = sample_ou(1e-3, 1000, tau, 21);
  const auto [lo, hi] = std::minmax_element(path.values.begin(), path.values.end());
  const double sd = std::sqrt(1.0 / (2.0 * tau));
  CHECK((*hi - *lo) / sd < 0.1);
}

TEST_CASE("OU preconditions and under-resolution warning") {
  CHECK_THROWS_AS(sample_ou(1e-3, 1, 0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_ou(1e-3, 10, 0.0, 1), std::invalid_argument);
  CHECK(sample_ou(1e-3, 10, 0.1, 1).warnings.empty());
  const NoisePath coarse = sample_ou(0.1, 10, 0.01, 1);
  CHECK(coarse.warnings.size() == 1);
  CHECK(coarse.size() == 10);
}

TEST_CASE("white noise preconditions") {
  CHECK_THROWS_AS(sample_white(0.0, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_white(1e-3, 0, 1), std::invalid_argument);
}

TEST_CASE("constant paths") {
  const NoisePath p = sample_constant(std::cos(2.0 * kPi / 5.0), 10);
  CHECK(p.size() == 10);
  for (double v : p.values) CHECK(v == Approx(0.30902).epsilon(1e-5));
  for (double v : sample_constant(0.0, 5).values) CHECK(v == 0.0);
  for (double v : sample_constant(1.0, 5).values) CHECK(v == 1.0);
  CHECK_THROWS_AS(sample_constant(0.5, 0), std::invalid_argument);
}

TEST_CASE("autocorrelation of a constant path vanishes") {
  const NoisePath p = sample_constant(0.7, 100);
  for (std::size_t lag : {0u, 1u, 50u, 99u}) CHECK(std::abs(autocorrelation(p, lag)) < 1e-24);
  CHECK_THROWS_AS(autocorrelation(p, 100), std::invalid_argument);
}

TEST_CASE("negated path") {
  const NoisePath p = sample_white(1e-2, 100, 4);
  const NoisePath m = negated(p);
  for (std::size_t k = 0; k < p.size(); ++k) CHECK(m.values[k] == -p.values[k]);
  CHECK(m.seed == p.seed);
  CHECK(m.dt == p.dt);
}

TEST_CASE("describe names the kind") {
  CHECK(describe(WhiteNoise{}).find("white") != std::string::npos);
  CHECK(describe(OrnsteinUhlenbeck{0.5}).find("0.5") != std::string::npos);
}
