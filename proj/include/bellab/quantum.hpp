#pragma once

// Two-photon polarization states and Born-rule coincidence statistics.
//
// Basis ordering is (HH, HV, VH, VV); the first letter is photon 1 (station
// A). H is the 0 degree axis, V the 90 degree axis, and a polarizer at angle
// a passes the component along cos(a) H + sin(a) V.

#include <array>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "bellab/angle.hpp"
#include "bellab/errors.hpp"

namespace bellab {

enum class Outcome : int { pass = 1, absorb = -1 };

constexpr int sign_of(Outcome o) { return static_cast<int>(o); }

constexpr Outcome outcome_from_sign(int s) { return s >= 0 ? Outcome::pass : Outcome::absorb; }

struct OutcomePair {
  Outcome a = Outcome::pass;
  Outcome b = Outcome::pass;

  int product() const { return sign_of(a) * sign_of(b); }
  friend bool operator==(OutcomePair, OutcomePair) = default;
};

/// The four joint outcomes in the order used by outcome_probabilities().
inline constexpr std::array<OutcomePair, 4> kOutcomePairs = {{
    {Outcome::pass, Outcome::pass},
    {Outcome::pass, Outcome::absorb},
    {Outcome::absorb, Outcome::pass},
    {Outcome::absorb, Outcome::absorb},
}};

constexpr std::size_t outcome_index(OutcomePair o) {
  return (o.a == Outcome::pass ? 0 : 2) + (o.b == Outcome::pass ? 0 : 1);
}

enum class Basis : int { HH = 0, HV = 1, VH = 2, VV = 3 };

enum class Station { a, b };

inline constexpr double kNormTolerance = 1e-12;

template <typename Scalar = double>
class TwoPhotonState {
 public:
  using Complex = std::complex<Scalar>;
  using Vector = Eigen::Matrix<Complex, 4, 1>;
  using Matrix = Eigen::Matrix<Complex, 2, 2>;

  /// Wraps amplitudes that are already normalized; throws otherwise.
  static TwoPhotonState from_amplitudes(const Vector& amplitudes) {
    const Scalar n2 = amplitudes.squaredNorm();
    if (!(std::abs(n2 - Scalar(1)) <= Scalar(kNormTolerance))) {
      throw UnnormalizedStateError("two-photon state is not normalized");
    }
    return TwoPhotonState(amplitudes);
  }

  /// Rescales arbitrary amplitudes to unit norm; throws on the null vector.
  static TwoPhotonState normalized(const Vector& amplitudes) {
    const Scalar n = amplitudes.norm();
    if (!(n > Scalar(kNormTolerance))) {
      throw NullStateError("superposition cancels to the null state");
    }
    return TwoPhotonState(amplitudes / n);
  }

  static TwoPhotonState basis(Basis b) {
    Vector v = Vector::Zero();
    v(static_cast<int>(b)) = Complex(1);
    return TwoPhotonState(v);
  }

  const Vector& amplitudes() const { return amplitudes_; }
  const Complex& operator[](Basis b) const { return amplitudes_(static_cast<int>(b)); }

  /// Rows index photon 1, columns photon 2.
  Matrix coefficient_matrix() const {
    Matrix m;
    m << amplitudes_(0), amplitudes_(1), amplitudes_(2), amplitudes_(3);
    return m;
  }

 private:
  explicit TwoPhotonState(const Vector& v) : amplitudes_(v) {}

  Vector amplitudes_;
};

using TwoPhotonStated = TwoPhotonState<double>;

/// (|HV> - |VH>) / sqrt(2): anti-correlated at equal settings.
template <typename Scalar = double>
TwoPhotonState<Scalar> make_singlet() {
  using State = TwoPhotonState<Scalar>;
  const Scalar s = Scalar(1) / std::sqrt(Scalar(2));
  typename State::Vector v;
  v << Scalar(0), s, -s, Scalar(0);
  return State::from_amplitudes(v);
}

/// (|HH> + |VV>) / sqrt(2): correlated at equal settings.
template <typename Scalar = double>
TwoPhotonState<Scalar> make_parallel() {
  using State = TwoPhotonState<Scalar>;
  const Scalar s = Scalar(1) / std::sqrt(Scalar(2));
  typename State::Vector v;
  v << s, Scalar(0), Scalar(0), s;
  return State::from_amplitudes(v);
}

/// Renormalized c1 * first + c2 * second.
template <typename Scalar>
TwoPhotonState<Scalar> superpose(const TwoPhotonState<Scalar>& first, const TwoPhotonState<Scalar>& second,
                                 std::complex<Scalar> c1, std::complex<Scalar> c2) {
  return TwoPhotonState<Scalar>::normalized(c1 * first.amplitudes() + c2 * second.amplitudes());
}

/// Polarizer eigenvector for outcome `o` at orientation `angle`.
template <typename Scalar = double>
Eigen::Matrix<Scalar, 2, 1> polarizer_axis(Angle angle, Outcome o) {
  const Scalar c = std::cos(Scalar(angle.value()));
  const Scalar s = std::sin(Scalar(angle.value()));
  Eigen::Matrix<Scalar, 2, 1> u;
  if (o == Outcome::pass) {
    u << c, s;
  } else {
    u << -s, c;
  }
  return u;
}

/// Born-rule joint probabilities in kOutcomePairs order.
template <typename Scalar>
std::array<Scalar, 4> outcome_probabilities(const TwoPhotonState<Scalar>& state, Angle a, Angle b) {
  const auto m = state.coefficient_matrix();
  std::array<Scalar, 4> probs{};
  for (std::size_t k = 0; k < kOutcomePairs.size(); ++k) {
    const Eigen::Matrix<std::complex<Scalar>, 2, 1> ua =
        polarizer_axis<Scalar>(a, kOutcomePairs[k].a).template cast<std::complex<Scalar>>();
    const Eigen::Matrix<std::complex<Scalar>, 2, 1> ub =
        polarizer_axis<Scalar>(b, kOutcomePairs[k].b).template cast<std::complex<Scalar>>();
    const std::complex<Scalar> amp = ua.transpose() * m * ub;
    probs[k] = std::norm(amp);
  }
  return probs;
}

template <typename Scalar>
Scalar coincidence_prob(const TwoPhotonState<Scalar>& state, Angle a, Angle b, OutcomePair outcome) {
  return outcome_probabilities(state, a, b)[outcome_index(outcome)];
}

/// Expectation of the product of the two +-1 outcomes.
template <typename Scalar>
Scalar correlation_qm(const TwoPhotonState<Scalar>& state, Angle a, Angle b) {
  const auto p = outcome_probabilities(state, a, b);
  return (p[0] + p[3]) - (p[1] + p[2]);
}

/// Single-station expectation <A(a)> or <B(b)>, the other side traced out.
template <typename Scalar>
Scalar marginal_expectation(const TwoPhotonState<Scalar>& state, Station station, Angle angle) {
  // the far side's analyzer angle is irrelevant for the marginal
  const auto p = outcome_probabilities(state, angle, angle);
  if (station == Station::a) return (p[0] + p[1]) - (p[2] + p[3]);
  return (p[0] + p[2]) - (p[1] + p[3]);
}

template <typename Scalar>
struct SchmidtResult {
  bool product = false;
  Scalar determinant_magnitude = 0;
  Eigen::Matrix<Scalar, 2, 1> coefficients;  // singular values, descending
};

/// Product-state test: Schmidt rank 1 iff the coefficient matrix is singular.
template <typename Scalar>
SchmidtResult<Scalar> is_product(const TwoPhotonState<Scalar>& state) {
  const auto m = state.coefficient_matrix();
  SchmidtResult<Scalar> r;
  r.determinant_magnitude = std::abs(m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0));
  r.product = r.determinant_magnitude <= Scalar(kNormTolerance);
  Eigen::JacobiSVD<typename TwoPhotonState<Scalar>::Matrix> svd(m);
  r.coefficients = svd.singularValues();
  return r;
}

}  // namespace bellab
