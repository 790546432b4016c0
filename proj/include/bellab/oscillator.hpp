#pragma once

// Two identical harmonic oscillators with bilinear coupling m*kappa*q1*q2:
// normal-mode transform, both Hamiltonian forms, the quantized spectrum and
// a velocity-Verlet (leapfrog) integrator for the classical motion.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "bellab/errors.hpp"

namespace bellab {

template <typename Scalar = double>
struct OscillatorParams {
  Scalar mass = 1;
  Scalar omega = 1;
  Scalar kappa = 0;  // frequency^2 units; may be negative
  Scalar h = 1;      // action constant

  /// Throws InvalidModelError unless m, omega, h > 0 and omega^2 > |kappa|.
  void validate() const {
    if (!(mass > 0) || !(omega > 0) || !(h > 0)) {
      throw InvalidModelError("mass, omega and h must be positive");
    }
    if (!(omega * omega - std::abs(kappa) > 0)) {
      throw InvalidModelError("omega^2 - |kappa| must be positive for real normal-mode frequencies");
    }
  }

  /// Force matrix K with F = -m K q.
  Eigen::Matrix<Scalar, 2, 2> stiffness() const {
    Eigen::Matrix<Scalar, 2, 2> k;
    k << omega * omega, kappa, kappa, omega * omega;
    return k;
  }
};

template <typename Scalar = double>
struct PhaseState {
  using Vector = Eigen::Matrix<Scalar, 2, 1>;
  Vector q = Vector::Zero();
  Vector p = Vector::Zero();

  static PhaseState make(Scalar q1, Scalar q2, Scalar p1, Scalar p2) {
    PhaseState s;
    s.q << q1, q2;
    s.p << p1, p2;
    return s;
  }

  bool finite() const { return q.allFinite() && p.allFinite(); }
};

/// Normal coordinates: q(0) in-phase, q(1) out-of-phase.
template <typename Scalar = double>
struct NormalModeState {
  using Vector = Eigen::Matrix<Scalar, 2, 1>;
  Vector q = Vector::Zero();
  Vector p = Vector::Zero();
};

/// (1/sqrt 2) [[1, 1], [1, -1]]: symmetric and orthogonal, hence its own inverse.
template <typename Scalar = double>
Eigen::Matrix<Scalar, 2, 2> normal_mode_transform() {
  const Scalar s = Scalar(1) / std::sqrt(Scalar(2));
  Eigen::Matrix<Scalar, 2, 2> t;
  t << s, s, s, -s;
  return t;
}

template <typename Scalar>
NormalModeState<Scalar> to_normal_modes(const PhaseState<Scalar>& s) {
  const auto t = normal_mode_transform<Scalar>();
  return {t * s.q, t * s.p};
}

template <typename Scalar>
PhaseState<Scalar> from_normal_modes(const NormalModeState<Scalar>& n) {
  const auto t = normal_mode_transform<Scalar>();
  return {t * n.q, t * n.p};
}

template <typename Scalar>
struct NormalFrequencies {
  Scalar in_phase;      // sqrt(omega^2 + kappa)
  Scalar out_of_phase;  // sqrt(omega^2 - kappa)

  Scalar max() const { return std::max(in_phase, out_of_phase); }
};

template <typename Scalar>
NormalFrequencies<Scalar> normal_frequencies(const OscillatorParams<Scalar>& params) {
  params.validate();
  const Scalar w2 = params.omega * params.omega;
  return {std::sqrt(w2 + params.kappa), std::sqrt(w2 - params.kappa)};
}

template <typename Scalar>
Scalar hamiltonian(const OscillatorParams<Scalar>& params, const PhaseState<Scalar>& s) {
  const Scalar m = params.mass;
  const Scalar w2 = params.omega * params.omega;
  return s.p.squaredNorm() / (2 * m) + m * w2 * s.q.squaredNorm() / 2 + m * params.kappa * s.q(0) * s.q(1);
}

/// Separated form: sum over modes of p'^2/2m + m w'^2 q'^2 / 2.
template <typename Scalar>
Scalar hamiltonian_normal(const OscillatorParams<Scalar>& params, const NormalModeState<Scalar>& n) {
  const auto w = normal_frequencies(params);
  const Scalar m = params.mass;
  return n.p.squaredNorm() / (2 * m) + m * w.in_phase * w.in_phase * n.q(0) * n.q(0) / 2 +
         m * w.out_of_phase * w.out_of_phase * n.q(1) * n.q(1) / 2;
}

/// Uncoupled share p_i^2/2m + m omega^2 q_i^2/2 of oscillator i (0 or 1).
template <typename Scalar>
Scalar oscillator_energy(const OscillatorParams<Scalar>& params, const PhaseState<Scalar>& s, int i) {
  const Scalar m = params.mass;
  return s.p(i) * s.p(i) / (2 * m) + m * params.omega * params.omega * s.q(i) * s.q(i) / 2;
}

/// H - dt^2 |F|^2 / (8m): conserved exactly (up to rounding) by velocity
/// Verlet for quadratic potentials, so its change measures secular drift.
template <typename Scalar>
Scalar leapfrog_modified_energy(const OscillatorParams<Scalar>& params, const PhaseState<Scalar>& s, Scalar dt) {
  const Eigen::Matrix<Scalar, 2, 1> force = -params.mass * (params.stiffness() * s.q);
  return hamiltonian(params, s) - dt * dt * force.squaredNorm() / (8 * params.mass);
}

template <typename Scalar>
struct QuantumLevel {
  std::uint32_t n1 = 0;  // in-phase quanta
  std::uint32_t n2 = 0;  // out-of-phase quanta
  Scalar energy = 0;
};

template <typename Scalar>
QuantumLevel<Scalar> energy_level(const OscillatorParams<Scalar>& params, std::uint32_t n1, std::uint32_t n2) {
  const auto w = normal_frequencies(params);
  const Scalar hbar = params.h / (2 * std::numbers::pi_v<Scalar>);
  const Scalar e = w.in_phase * hbar * (Scalar(n1) + Scalar(0.5)) + w.out_of_phase * hbar * (Scalar(n2) + Scalar(0.5));
  return {n1, n2, e};
}

/// The k lowest levels; equal energies are ordered by ascending n2.
template <typename Scalar>
std::vector<QuantumLevel<Scalar>> lowest_levels(const OscillatorParams<Scalar>& params, std::uint32_t k) {
  std::vector<QuantumLevel<Scalar>> all;
  for (std::uint32_t i = 0; i < k; ++i)
    for (std::uint32_t j = 0; j < k; ++j) all.push_back(energy_level(params, i, j));
  std::stable_sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
    if (x.energy != y.energy) return x.energy < y.energy;
    return x.n2 < y.n2;
  });
  all.resize(std::min<std::size_t>(k, all.size()));
  return all;
}

template <typename Scalar>
struct TrajectoryPoint {
  Scalar t = 0;
  PhaseState<Scalar> state;
  Scalar e1 = 0;
  Scalar e2 = 0;
  Scalar total = 0;
};

template <typename Scalar>
struct Trajectory {
  std::vector<TrajectoryPoint<Scalar>> points;
  Scalar relative_drift = 0;        // max |H~(t) - H~(0)| / |H~(0)|, modified energy
  Scalar relative_fluctuation = 0;  // max |H(t) - H(0)| / |H(0)|, raw energy
  std::uint64_t steps = 0;
};

/// Velocity-Verlet integration; records every `sample_every`-th step plus
/// the initial state. Requires dt * max(w') < 0.1.
template <typename Scalar>
Trajectory<Scalar> integrate_classical(const OscillatorParams<Scalar>& params, const PhaseState<Scalar>& initial,
                                       Scalar dt, std::uint64_t steps, std::uint64_t sample_every = 1) {
  const auto w = normal_frequencies(params);
  if (!(dt > 0) || !(dt * w.max() < Scalar(0.1))) {
    throw InvalidModelError("time step violates dt * max(normal frequency) < 0.1");
  }
  if (sample_every == 0) throw std::invalid_argument("sample_every must be positive");
  if (!initial.finite()) throw std::invalid_argument("initial state must be finite");

  const Eigen::Matrix<Scalar, 2, 2> k = params.stiffness();
  const Scalar m = params.mass;
  auto record = [&](Scalar t, const PhaseState<Scalar>& s) {
    return TrajectoryPoint<Scalar>{t, s, oscillator_energy(params, s, 0), oscillator_energy(params, s, 1),
                                   hamiltonian(params, s)};
  };

  Trajectory<Scalar> traj;
  traj.steps = steps;
  traj.points.reserve(steps / sample_every + 2);
  PhaseState<Scalar> s = initial;
  const Scalar h0 = hamiltonian(params, s);
  const Scalar shadow0 = leapfrog_modified_energy(params, s, dt);
  traj.points.push_back(record(0, s));

  Eigen::Matrix<Scalar, 2, 1> force = -m * (k * s.q);
  for (std::uint64_t n = 1; n <= steps; ++n) {
    s.p += Scalar(0.5) * dt * force;
    s.q += dt * s.p / m;
    force = -m * (k * s.q);
    s.p += Scalar(0.5) * dt * force;

    const Scalar h = hamiltonian(params, s);
    const Scalar shadow = leapfrog_modified_energy(params, s, dt);
    if (h0 != 0) traj.relative_fluctuation = std::max(traj.relative_fluctuation, std::abs(h - h0) / std::abs(h0));
    if (shadow0 != 0) traj.relative_drift = std::max(traj.relative_drift, std::abs(shadow - shadow0) / std::abs(shadow0));
    if (n % sample_every == 0 || n == steps) traj.points.push_back(record(Scalar(n) * dt, s));
  }
  return traj;
}

/// Period of E1 - E2 from its sign changes (linear interpolation between
/// samples); empty if fewer than two crossings were recorded.
template <typename Scalar>
std::optional<Scalar> exchange_period(const Trajectory<Scalar>& traj) {
  std::vector<Scalar> crossings;
  const auto& pts = traj.points;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Scalar d0 = pts[i - 1].e1 - pts[i - 1].e2;
    const Scalar d1 = pts[i].e1 - pts[i].e2;
    if ((d0 < 0) != (d1 < 0) && d1 != d0) {
      crossings.push_back(pts[i - 1].t + (pts[i].t - pts[i - 1].t) * (-d0) / (d1 - d0));
    }
  }
  if (crossings.size() < 2) return std::nullopt;
  // two sign changes per exchange cycle
  return 2 * (crossings.back() - crossings.front()) / Scalar(crossings.size() - 1);
}

/// 2 pi / (w1' - w2'); empty when the modes are degenerate.
template <typename Scalar>
std::optional<Scalar> expected_exchange_period(const OscillatorParams<Scalar>& params) {
  const auto w = normal_frequencies(params);
  const Scalar gap = std::abs(w.in_phase - w.out_of_phase);
  if (!(gap > 0)) return std::nullopt;
  return 2 * std::numbers::pi_v<Scalar> / gap;
}

}  // namespace bellab
