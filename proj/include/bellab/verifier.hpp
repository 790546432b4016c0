#pragma once

// Numerical and exact checks of each step from the factorized correlation
// to the CHSH bound, and of the complete-lambda (atomized) variant in which
// cross-trial quadruple products vanish.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "bellab/estimator.hpp"
#include "bellab/exact.hpp"
#include "bellab/hvmodels.hpp"

namespace bellab {

inline constexpr double kChainTolerance = 1e-9;
inline constexpr double kLocalBound = 2.0;

struct BoundViolation {
  Station station;
  Angle setting;
  HiddenVariable lambda;
  double value;
};

struct BoundsReport {
  std::size_t points_checked = 0;
  std::vector<BoundViolation> violations;
  bool pass() const { return violations.empty(); }
};

/// Quadrature nodes of a distribution (midpoints, or every atom).
std::vector<HiddenVariable> lambda_nodes(const LambdaDistribution& dist, QuadratureOptions opts = {});

/// |A| <= 1 and |B| <= 1 at every (setting, lambda) grid point.
BoundsReport check_bounds(const FactorizedModel& model, std::span<const Angle> settings,
                          std::span<const HiddenVariable> lambdas);

/// A(a)B(b)A(a')B(b') - A(a)B(b')A(a')B(b) for a_values = (A(a), A(a')),
/// b_values = (B(b), B(b')). Zero up to rounding for any reals.
double check_zero_identity(std::array<double, 2> a_values, std::array<double, 2> b_values);

struct StepSsReport {
  int sign = 1;
  double left = 0.0;   // |P(a,b) - P(a,b')|
  double right = 0.0;  // int rho [1 +- A(a')B(b')] + int rho [1 +- A(a')B(b)]
  bool holds = false;  // left <= right + 1e-9
};

StepSsReport check_step_ss(const FactorizedModel& model, const ChshQuadruple& q, int sign,
                           QuadratureOptions opts = {});

struct BellReport {
  double max_value = 0.0;
  ChshQuadruple attaining;
  std::size_t quadruples = 0;
  bool holds = false;  // max_value <= 2 + 1e-9
};

BellReport check_bell_inequality(const FactorizedModel& model, std::span<const ChshQuadruple> grid,
                                 QuadratureOptions opts = {});

/// Weighted Kronecker-atom product sum_lambda w(lambda) [A(a)B(b)]_n [A(a')B(b')]_m:
/// weight/N times the four-fold product when n == m, exactly zero otherwise.
ExactRatio cross_term_integral(const AtomizedModel& model, std::size_t n, std::size_t m, Angle a,
                               Angle a_prime, Angle b, Angle b_prime);

struct DegenerateEntry {
  ChshQuadruple quadruple;
  ExactRatio p_ab, p_abp, p_apb, p_apbp;
  // Quadruple-product terms of the chain, summed over every atom pair
  // drawn from the respective subsamples: (a,b)x(a',b') and (a,b')x(a',b).
  ExactRatio quadruple_term_first;
  ExactRatio quadruple_term_second;
  std::uint64_t atom_pairs = 0;
  std::uint64_t nonzero_cross_pairs = 0;  // pairs with n != m and a nonzero term
  // P(a,b) - P(a,b') rebuilt from the chain's right side with the given sign choice.
  ExactRatio rhs_plus;
  ExactRatio rhs_minus;
  bool chain_consistent = false;  // both rhs equal P(a,b) - P(a,b') exactly
  ExactRatio degenerate_value;    // |P(a,b)| + |P(a',b')|
  bool degenerate_holds = false;  // degenerate_value <= 2, exact
  double standard_value = 0.0;    // |P(a,b) - P(a,b')| + |P(a',b') + P(a',b)|
  bool standard_exceeds_bound = false;
  double uncertified_excess = 0.0;  // max(0, standard_value - 2): not excluded by the degenerate form
};

struct DegenerateReport {
  std::vector<DegenerateEntry> entries;
  bool cross_terms_vanish = true;
  bool degenerate_holds = true;
  bool chain_consistent = true;
  double max_standard = 0.0;
  ExactRatio max_degenerate;
};

DegenerateReport check_degenerate_inequality(const AtomizedModel& model, std::span<const ChshQuadruple> grid);

}  // namespace bellab
