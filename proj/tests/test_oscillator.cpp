#include "doctest.h"
#include "oracles.hpp"

#include <random>

#include "bellab/oscillator.hpp"

using namespace bellab;

using Params = OscillatorParams<double>;
using State = PhaseState<double>;

namespace {

Params params(double kappa, double h = 1.0) { return Params{1.0, 1.0, kappa, h}; }

}  // namespace

TEST_CASE("normal-mode transform examples") {
  const auto in_phase = to_normal_modes(State::make(1, 1, 0, 0));
  CHECK(in_phase.q(0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(std::abs(in_phase.q(1)) <= 1e-15);

  const auto out_of_phase = to_normal_modes(State::make(1, -1, 0, 0));
  CHECK(std::abs(out_of_phase.q(0)) <= 1e-15);
  CHECK(out_of_phase.q(1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

  const auto zero = to_normal_modes(State{});
  CHECK(zero.q.isZero(0.0));
  CHECK(zero.p.isZero(0.0));
}

TEST_CASE("hamiltonian examples") {
  CHECK(hamiltonian(params(0.0), State::make(1, 0, 0, 0)) == 0.5);
  CHECK(hamiltonian(params(0.7), State{}) == 0.0);
  CHECK(hamiltonian_normal(params(0.7), to_normal_modes(State{})) == 0.0);

  const auto s = State::make(1, 1, 0, 0);
  CHECK(std::abs(hamiltonian(params(0.5), s) - 1.5) <= 1e-12);
  CHECK(std::abs(hamiltonian_normal(params(0.5), to_normal_modes(s)) - 1.5) <= 1e-12);
}

TEST_CASE("normal_frequencies examples") {
  const auto free = normal_frequencies(params(0.0));
  CHECK(free.in_phase == 1.0);
  CHECK(free.out_of_phase == 1.0);

  const auto coupled = normal_frequencies(params(0.5));
  CHECK(std::abs(coupled.in_phase - oracle::kSqrtOnePointFive) <= 1e-12);
  CHECK(std::abs(coupled.out_of_phase - oracle::kSqrtHalf) <= 1e-12);

  CHECK_THROWS_AS(normal_frequencies(params(1.5)), InvalidModelError);
  CHECK_THROWS_AS(normal_frequencies(params(-1.5)), InvalidModelError);
  CHECK_THROWS_AS(normal_frequencies(params(1.0)), InvalidModelError);
  CHECK_THROWS_AS(normal_frequencies(Params{0.0, 1.0, 0.0, 1.0}), InvalidModelError);
}

TEST_CASE("energy_level examples") {
  const double two_pi = 2 * oracle::pi;
  CHECK(std::abs(energy_level(params(0.0, two_pi), 0, 0).energy - 1.0) <= 1e-12);
  CHECK(std::abs(energy_level(params(0.5, two_pi), 0, 0).energy - oracle::kGroundEnergyKappaHalf) <= 1e-12);

  const auto p = params(0.5, two_pi);
  const double gap = energy_level(p, 1, 0).energy - energy_level(p, 0, 0).energy;
  CHECK(std::abs(gap - oracle::kSqrtOnePointFive) <= 1e-12);

  const auto levels = lowest_levels(params(0.0, two_pi), 3);
  REQUIRE(levels.size() == 3);
  CHECK(levels[0].energy == doctest::Approx(1.0));
  CHECK(levels[1].energy == doctest::Approx(2.0));
  CHECK(levels[2].energy == doctest::Approx(2.0));
  CHECK((levels[1].n1 == 1 && levels[1].n2 == 0));
  CHECK((levels[2].n1 == 0 && levels[2].n2 == 1));
}

TEST_CASE("integrate_classical: pure in-phase mode never exchanges energy") {
  const auto traj = integrate_classical(params(0.1), State::make(1, 1, 0, 0), 0.001, 20000, 10);
  const double total = traj.points.front().total;
  for (const auto& pt : traj.points) CHECK(std::abs(pt.e1 - pt.e2) <= 1e-6 * total);
  CHECK_FALSE(exchange_period(traj).has_value());
}

TEST_CASE("integrate_classical: uncoupled oscillators keep their energies") {
  const auto s0 = State::make(0.3, -1.2, 0.8, 0.1);
  const auto traj = integrate_classical(params(0.0), s0, 0.001, 20000, 10);
  const double e1 = traj.points.front().e1;
  const double e2 = traj.points.front().e2;
  for (const auto& pt : traj.points) {
    CHECK(std::abs(pt.e1 - e1) <= 1e-6 * e1);
    CHECK(std::abs(pt.e2 - e2) <= 1e-6 * e2);
  }
}

TEST_CASE("integrate_classical: beat period") {
  const auto p = params(0.1);
  const double dt = 0.01 / normal_frequencies(p).in_phase;
  const auto traj = integrate_classical(p, State::make(1, 0, 0, 0), dt, 60000);
  const auto period = exchange_period(traj);
  REQUIRE(period.has_value());
  REQUIRE(expected_exchange_period(p).has_value());
  CHECK(std::abs(*expected_exchange_period(p) - oracle::kBeatPeriodKappaTenth) <= 1e-9);
  CHECK(std::abs(*period - oracle::kBeatPeriodKappaTenth) <= 0.01 * oracle::kBeatPeriodKappaTenth);
}

TEST_CASE("integrate_classical: stability precondition") {
  CHECK_THROWS_AS(integrate_classical(params(0.5), State::make(1, 0, 0, 0), 0.1001 / oracle::kSqrtOnePointFive, 10),
                  InvalidModelError);
  CHECK_NOTHROW(integrate_classical(params(0.5), State::make(1, 0, 0, 0), 0.08, 10));
  CHECK_THROWS_AS(integrate_classical(params(1.5), State::make(1, 0, 0, 0), 0.001, 10), InvalidModelError);
}

TEST_CASE("property: transform involution") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int i = 0; i < 1000; ++i) {
    const auto s = State::make(u(gen), u(gen), u(gen), u(gen));
    const auto back = from_normal_modes(to_normal_modes(s));
    CHECK((back.q - s.q).cwiseAbs().maxCoeff() <= 1e-14 * 10);
    CHECK((back.p - s.p).cwiseAbs().maxCoeff() <= 1e-14 * 10);
  }
}

TEST_CASE("property: hamiltonian invariance under the transform") {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_real_distribution<double> pos(0.2, 3.0);
  double worst = 0;
  for (int set = 0; set < 100; ++set) {
    Params p{pos(gen), pos(gen), 0.0, pos(gen)};
    p.kappa = 0.99 * u(gen) * p.omega * p.omega;
    for (int i = 0; i < 10000; ++i) {
      const auto s = State::make(u(gen), u(gen), u(gen), u(gen));
      worst = std::max(worst, std::abs(hamiltonian(p, s) - hamiltonian_normal(p, to_normal_modes(s))));
    }
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("property: kappa -> 0 continuity") {
  for (double kappa : {1e-2, 1e-4, 1e-6, -1e-8}) {
    const auto w = normal_frequencies(Params{1.0, 2.0, kappa, 1.0});
    CHECK(std::abs(w.in_phase - 2.0) <= std::abs(kappa));
    CHECK(std::abs(w.out_of_phase - 2.0) <= std::abs(kappa));
  }
}

TEST_CASE("property: spectrum additivity") {
  const auto p = Params{1.3, 0.9, -0.4, 2.5};
  const double gap1 = energy_level(p, 1, 0).energy - energy_level(p, 0, 0).energy;
  const double gap2 = energy_level(p, 0, 1).energy - energy_level(p, 0, 0).energy;
  for (std::uint32_t n1 = 0; n1 < 20; ++n1)
    for (std::uint32_t n2 = 0; n2 < 20; ++n2) {
      CHECK(std::abs(energy_level(p, n1 + 1, n2).energy - energy_level(p, n1, n2).energy - gap1) <= 1e-12);
      CHECK(std::abs(energy_level(p, n1, n2 + 1).energy - energy_level(p, n1, n2).energy - gap2) <= 1e-12);
    }
}

TEST_CASE("property: leapfrog energy over 1e5 steps") {
  const auto p = params(0.1);
  const double dt = 0.01 / normal_frequencies(p).in_phase;
  const auto traj = integrate_classical(p, State::make(1, 0, 0, 0), dt, 100000, 1000);
  CHECK(traj.relative_drift <= 1e-6);
  // raw H oscillates at O((w dt)^2 / 4) with no secular growth
  const double w_dt = normal_frequencies(p).max() * dt;
  CHECK(traj.relative_fluctuation <= w_dt * w_dt / 4 * 1.05);
}

TEST_CASE("long double instantiation") {
  OscillatorParams<long double> p{1, 1, 0.5L, 1};
  const auto s = PhaseState<long double>::make(1, 1, 0, 0);
  CHECK(std::abs(static_cast<double>(hamiltonian(p, s)) - 1.5) <= 1e-15);
}
