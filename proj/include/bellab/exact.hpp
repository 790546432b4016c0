#pragma once

#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

namespace bellab {

/// Integer numerator over a positive integer denominator. Atomized-model
/// sums accumulate integer +-1 products and divide once, so a zero result
/// is literally zero.
struct ExactRatio {
  std::int64_t numerator = 0;
  std::int64_t denominator = 1;

  ExactRatio() = default;
  ExactRatio(std::int64_t num, std::int64_t den) : numerator(num), denominator(den) {
    if (den <= 0) throw std::invalid_argument("ExactRatio denominator must be positive");
    const std::int64_t g = std::gcd(num, den);
    if (g > 1) {
      numerator /= g;
      denominator /= g;
    }
  }

  double value() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }
  bool is_zero() const { return numerator == 0; }

  ExactRatio abs() const { return {std::llabs(numerator), denominator}; }

  friend ExactRatio operator+(ExactRatio x, ExactRatio y) {
    return {x.numerator * y.denominator + y.numerator * x.denominator, x.denominator * y.denominator};
  }
  friend ExactRatio operator-(ExactRatio x, ExactRatio y) {
    return {x.numerator * y.denominator - y.numerator * x.denominator, x.denominator * y.denominator};
  }
  friend bool operator==(ExactRatio x, ExactRatio y) {
    return x.numerator * y.denominator == y.numerator * x.denominator;
  }
  friend bool operator<=(ExactRatio x, ExactRatio y) {
    return x.numerator * y.denominator <= y.numerator * x.denominator;
  }
};

}  // namespace bellab
