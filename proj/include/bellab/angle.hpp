#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bellab {

inline constexpr double kPi = std::numbers::pi;

/// Polarizer orientation in radians, stored modulo pi in [0, pi).
class Angle {
 public:
  constexpr Angle() = default;

  explicit Angle(double radians) : value_(normalize(radians)) {}

  static Angle radians(double r) { return Angle(r); }
  static Angle degrees(double d) { return Angle(d * kPi / 180.0); }

  double value() const { return value_; }
  double degrees_value() const { return value_ * 180.0 / kPi; }

  static double normalize(double radians) {
    if (!std::isfinite(radians)) {
      throw std::invalid_argument("angle must be finite");
    }
    double r = std::fmod(radians, kPi);
    if (r < 0.0) r += kPi;
    // r + pi may round up to pi for tiny negative inputs
    if (r >= kPi) r = 0.0;
    return r;
  }

  friend bool operator==(Angle, Angle) = default;

 private:
  double value_ = 0.0;
};

/// Equality of orientations modulo pi, with an absolute tolerance in radians.
inline bool same_orientation(Angle x, Angle y, double tol = 1e-12) {
  const double d = std::abs(x.value() - y.value());
  return std::min(d, kPi - d) <= tol;
}

}  // namespace bellab
