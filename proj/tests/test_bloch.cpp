#include <doctest.h>

#include <cmath>

#include "suvlab/bloch.hpp"
#include "suvlab/errors.hpp"

using namespace suvlab;
using doctest::Approx;

namespace {

void check_amplitudes(const StateVector& v, cplx c0, cplx c1, double tol = 1e-15) {
  CHECK(std::abs(v.c0 - c0) < tol);
  CHECK(std::abs(v.c1 - c1) < tol);
}

}  // namespace

TEST_CASE("to_state_vector at the poles and the equator") {
  const double r = 1.0 / std::sqrt(2.0);
  check_amplitudes(to_state_vector({0.0, 0.0}), 1.0, 0.0);
  check_amplitudes(to_state_vector({kPi, 0.0}), 0.0, 1.0);
  check_amplitudes(to_state_vector({kPi / 2, 0.0}), r, r);
  const StateVector v = to_state_vector({kPi / 2, kPi / 2});
  check_amplitudes(v, r, cplx{0.0, r});
}

TEST_CASE("from_state_vector closed forms") {
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(from_state_vector({1.0, 0.0}).theta == 0.0);
  CHECK(from_state_vector({0.0, 1.0}).theta == Approx(kPi).epsilon(1e-15));
  const BlochState s = from_state_vector({r, cplx{0.0, r}});
  CHECK(s.theta == Approx(kPi / 2).epsilon(1e-14));
  CHECK(s.phi == Approx(kPi / 2).epsilon(1e-14));
}

TEST_CASE("pole states report phi = 0 whatever the amplitude phase") {
  CHECK(from_state_vector({std::polar(1.0, 0.7), 0.0}).phi == 0.0);
  CHECK(from_state_vector({0.0, std::polar(1.0, 2.1)}).phi == 0.0);
}

TEST_CASE("from_state_vector drops the global phase") {
  const BlochState s{1.1, 4.0};
  StateVector v = to_state_vector(s);
  const cplx g = std::polar(1.0, -2.3);
  v.c0 *= g;
  v.c1 *= g;
  const BlochState back = from_state_vector(v);
  CHECK(back.theta == Approx(s.theta).epsilon(1e-12));
  CHECK(back.phi == Approx(s.phi).epsilon(1e-12));
}

TEST_CASE("round trip over a theta, phi grid") {
  double worst = 0.0;
  for (int i = 1; i < 50; ++i) {
    for (int j = 0; j < 64; ++j) {
      const BlochState s{kPi * i / 50.0, 2.0 * kPi * j / 64.0};
      const BlochState back = from_state_vector(to_state_vector(s));
      double dphi = std::abs(back.phi - s.phi);
      dphi = std::min(dphi, 2.0 * kPi - dphi);
      worst = std::max({worst, std::abs(back.theta - s.theta), dphi});
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("degenerate vectors are rejected") {
  CHECK_THROWS_AS(from_state_vector({0.0, 0.0}), InvalidState);
  CHECK_THROWS_AS(from_state_vector({1e-8, 0.0}), InvalidState);
}

TEST_CASE("normalized() folds angles into the canonical domain") {
  // theta -> -theta is the same point with phi shifted by pi.
  const BlochState s = BlochState::normalized(-0.5, -1.0);
  CHECK(s.theta == Approx(0.5));
  CHECK(s.phi == Approx(kPi - 1.0));
  const BlochState wrapped = BlochState::normalized(0.5, 2.0 * kPi + 0.25);
  CHECK(wrapped.phi == Approx(0.25));
  CHECK(BlochState::normalized(kPi, 1.0).phi == 0.0);
}

TEST_CASE("sigma_z expectation") {
  CHECK(sigma_z_expectation(BlochState{0.0, 0.0}) == 1.0);
  CHECK(sigma_z_expectation(BlochState{kPi, 0.0}) == -1.0);
  CHECK(std::abs(sigma_z_expectation(BlochState{kPi / 2, 0.0})) < 1e-16);
  CHECK(sigma_z_expectation(to_state_vector({1.0, 2.0})) == Approx(std::cos(1.0)).epsilon(1e-14));
}

TEST_CASE("Born weights") {
  const BornWeights eq = born_weights({kPi / 2, 0.0});
  CHECK(eq.p0 == Approx(0.5).epsilon(1e-15));
  CHECK(eq.p1 == Approx(0.5).epsilon(1e-15));
  const BornWeights pole = born_weights({0.0, 0.0});
  CHECK(pole.p0 == 1.0);
  CHECK(pole.p1 == 0.0);
  const BornWeights third = born_weights({kPi / 3, 0.0});
  CHECK(third.p0 == Approx(0.75).epsilon(1e-15));
  CHECK(third.p1 == Approx(0.25).epsilon(1e-14));
}

TEST_CASE("Born weight identities hold for every angle") {
  for (int i = 0; i <= 200; ++i) {
    const BlochState s{kPi * i / 200.0, 0.3};
    const BornWeights w = born_weights(s);
    CHECK(w.p0 + w.p1 == Approx(1.0).epsilon(1e-15));
    CHECK(w.p0 == Approx((1.0 + sigma_z_expectation(s)) / 2.0).epsilon(1e-14));
  }
}

TEST_CASE("renormalize") {
  const double r = 1.0 / std::sqrt(2.0);
  check_amplitudes(renormalize({2.0, 0.0}), 1.0, 0.0);
  check_amplitudes(renormalize({1.0, 1.0}), r, r);
  check_amplitudes(renormalize({0.0, cplx{0.0, 3.0}}), 0.0, cplx{0.0, 1.0});
  const StateVector v = renormalize({cplx{0.3, -1.2}, cplx{2.5, 0.4}});
  CHECK(std::abs(v.norm_squared() - 1.0) < 1e-12);
  CHECK_THROWS_AS(renormalize({0.0, 0.0}), SolverBlowup);
  CHECK_THROWS_AS(renormalize({std::nan(""), 0.0}), SolverBlowup);
}

TEST_CASE("fidelity ignores global phase") {
  const StateVector a = to_state_vector({0.8, 1.3});
  StateVector b = a;
  b.c0 *= std::polar(1.0, 0.4);
  b.c1 *= std::polar(1.0, 0.4);
  CHECK(fidelity(a, b) == Approx(1.0).epsilon(1e-15));
  CHECK(fidelity(StateVector{1.0, 0.0}, StateVector{0.0, 1.0}) == 0.0);
}
