#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "suvlab/ensemble.hpp"
#include "suvlab/errors.hpp"

using namespace suvlab;
using doctest::Approx;

namespace {

// Desk-test ensembles use dt = 1e-3; tolerances below scale with M.
EnsembleConfig born_config(double theta0, std::size_t M, std::uint64_t seed = 1) {
  EnsembleConfig cfg;
  cfg.M = M;
  cfg.theta0 = theta0;
  cfg.params.J = 1.0;
  cfg.params.G = 1.0;
  cfg.integrator.dt = 1e-3;
  cfg.integrator.max_time = 60.0;
  cfg.record_every = 100;
  cfg.seed = seed;
  return cfg;
}

double binomial_se(double p, std::size_t M) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(M));
}

// P(xi < c) for xi ~ N(0, s^2), by direct quadrature of the density.
double normal_below(double c, double s) {
  const int n = 20000;
  const double lo = -12.0 * s;
  const double h = (c - lo) / n;
  double acc = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double x = lo + h * k;
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    acc += w * std::exp(-0.5 * x * x / (s * s));
  }
  return acc * h / (s * std::sqrt(2.0 * kPi));
}

}  // namespace

TEST_CASE("absorbed start stays at pole 0") {
  EnsembleConfig cfg = born_config(0.0, 100);
  const EnsembleResult r = run_ensemble(cfg);
  CHECK(r.count_pole0 == 100);
  CHECK(r.collapse_times.size() == 100);
  for (double t : r.collapse_times) CHECK(t == 0.0);
  CHECK(martingale_check(r) == 0.0);
  CHECK(statistics_conservation(r).pass);
}

TEST_CASE("counts, series bounds and determinism") {
  EnsembleConfig cfg = born_config(kPi / 3.0, 600, 5);
  cfg.workers = 1;
  const EnsembleResult a = run_ensemble(cfg);
  CHECK(a.total() == cfg.M);
  for (double m : a.mean_sigma_z_series) {
    CHECK(m >= -1.0);
    CHECK(m <= 1.0);
  }
  CHECK(a.times.size() == a.mean_sigma_z_series.size());
  CHECK(a.times.size() == cfg.integrator.steps() / cfg.record_every + 1);

  cfg.workers = 3;
  const EnsembleResult b = run_ensemble(cfg);
  CHECK(a.count_pole0 == b.count_pole0);
  CHECK(a.count_pole1 == b.count_pole1);
  CHECK(a.collapse_times == b.collapse_times);
  CHECK(a.mean_sigma_z_series == b.mean_sigma_z_series);
  CHECK(a.stderr_series == b.stderr_series);

  cfg.seed = 6;
  const EnsembleResult c = run_ensemble(cfg);
  CHECK(a.collapse_times != c.collapse_times);
}

TEST_CASE("Born statistics at pi/3, pi/2 and 2pi/3") {
  const std::size_t M = 4000;
  for (double theta0 : {kPi / 3.0, kPi / 2.0, 2.0 * kPi / 3.0}) {
    CAPTURE(theta0);
    const EnsembleResult r = run_ensemble(born_config(theta0, M, 100));
    const BornTest t = born_statistics_test(r);
    CHECK(t.expected_p0 == Approx(std::pow(std::cos(theta0 / 2.0), 2)));
    CHECK(t.pass);
    CHECK(std::abs(t.empirical_p0 - t.expected_p0) < 4.0 * binomial_se(t.expected_p0, M));
    const ConservationReport c = statistics_conservation(r);
    CHECK(c.pass);
    CHECK(martingale_check(r) < 4.0 * std::sqrt((1.0 - std::pow(std::cos(theta0), 2)) / M));
  }
}

TEST_CASE("mirror ensembles give complementary statistics") {
  const std::size_t M = 2000;
  const double theta0 = 1.1;
  const EnsembleResult a = run_ensemble(born_config(theta0, M, 31));
  const EnsembleResult b = run_ensemble(born_config(kPi - theta0, M, 32));
  const double p = std::pow(std::cos(theta0 / 2.0), 2);
  const double combined = std::sqrt(2.0) * binomial_se(p, M);
  CHECK(std::abs(a.empirical_p0() + b.empirical_p0() - 1.0) < 4.0 * combined);
}

TEST_CASE("noise-dominated ratio fails the Born and martingale gates") {
  EnsembleConfig cfg = born_config(kPi / 3.0, 2000, 8);
  cfg.params.G = 100.0;
  cfg.integrator.dt = 1e-6;
  cfg.integrator.max_time = 1.0;
  cfg.record_every = 200;
  const EnsembleResult r = run_ensemble(cfg);
  const BornTest t = born_statistics_test(r);
  CHECK(t.expected_p0 == Approx(0.75));
  CHECK_FALSE(t.pass);
  CHECK(t.empirical_p0 < 0.75);
  CHECK_FALSE(statistics_conservation(r).pass);
  CHECK(martingale_check(r) > 4.0 * std::sqrt(0.75 / 2000.0));
}

TEST_CASE("born_statistics_test refuses short horizons") {
  EnsembleConfig cfg = born_config(kPi / 2.0, 50);
  cfg.integrator.max_time = 0.5;
  const EnsembleResult r = run_ensemble(cfg);
  CHECK(r.count_unresolved > 0);
  CHECK(r.total() == 50);
  CHECK_THROWS_AS(born_statistics_test(r), HorizonTooShort);
}

TEST_CASE("weak noise sends every trajectory to the nearest pole") {
  EnsembleConfig base = born_config(kPi / 3.0, 1000, 3);
  const std::vector<double> ratios{0.01};
  const auto near0 = gj_ratio_sweep(ratios, kPi / 3.0, base);
  CHECK(near0[0].empirical_p0 == 1.0);
  CHECK(near0[0].pole0 == 1000);
  const auto near1 = gj_ratio_sweep(ratios, 2.0 * kPi / 3.0, base);
  CHECK(near1[0].empirical_p0 == 0.0);
  CHECK(near1[0].pole1 == 1000);
  const std::vector<double> bad{0.0};
  CHECK_THROWS_AS(gj_ratio_sweep(bad, kPi / 3.0, base), std::invalid_argument);
}

TEST_CASE("OU noise: near-white passes, tau = 1/J deviates") {
  EnsembleConfig base = born_config(kPi / 3.0, 4000, 12);
  const std::vector<double> taus{base.integrator.dt, 1.0};
  const auto rows = tau_sweep(taus, kPi / 3.0, base);
  CHECK(std::abs(rows[0].born_deviation_sigma) < 4.0);
  CHECK(std::abs(rows[1].born_deviation_sigma) > 5.0);
  CHECK(rows[1].empirical_p0 > 0.75);
}

TEST_CASE("frozen OU noise matches the quenched-disorder oracle") {
  // With tau_t far beyond the collapse time each trajectory sees a fixed
  // xi ~ N(0, 1/(2 tau)) and goes to pole 0 iff (G/J) xi < cos(theta0).
  const double tau = 1e3;
  const double ratio = 0.5 * std::sqrt(2.0 * tau);  // (G/J) * sd(xi) = 0.5
  EnsembleConfig cfg = born_config(kPi / 3.0, 2000, 44);
  cfg.params.G = ratio;
  cfg.noise = OrnsteinUhlenbeck{tau};
  const EnsembleResult r = run_ensemble(cfg);
  const double oracle = normal_below(std::cos(kPi / 3.0), 0.5);
  CHECK(oracle == Approx(0.841345).epsilon(1e-5));
  CHECK(r.count_unresolved == 0);
  CHECK(std::abs(r.empirical_p0() - oracle) < 4.0 * binomial_se(oracle, cfg.M));
}

TEST_CASE("deterministic collapse time scales as 1/(eps N)") {
  EnsembleConfig base = born_config(kPi / 3.0, 3);
  base.params.G = 0.0;
  const std::vector<double> scales{1.0, 2.0, 4.0, 8.0};
  const ScalingResult s = scaling_sweep(scales, kPi / 3.0, base);
  CHECK(s.slope == Approx(-1.0).epsilon(0.05));
  for (std::size_t k = 1; k < s.rows.size(); ++k) {
    const double ratio = s.rows[k - 1].median_collapse_time / s.rows[k].median_collapse_time;
    CHECK(ratio == Approx(2.0).epsilon(0.02));
  }
  const std::vector<double> one{1.0, 2.0};
  const ScalingResult near_pole = scaling_sweep(one, kPi / 100.0, base);
  CHECK(near_pole.rows[0].median_collapse_time < s.rows[0].median_collapse_time);
  CHECK_THROWS_AS(scaling_sweep(one, kPi / 2.0, base), std::invalid_argument);
}

TEST_CASE("ensemble config validation") {
  EnsembleConfig cfg = born_config(kPi / 3.0, 10);
  cfg.M = 0;
  CHECK_THROWS_AS(run_ensemble(cfg), std::invalid_argument);
  cfg.M = 10;
  cfg.theta0 = 4.0;
  CHECK_THROWS_AS(run_ensemble(cfg), std::invalid_argument);
  CHECK(resolve_workers(5) == 5);
  CHECK(resolve_workers(0) >= 1);
}
