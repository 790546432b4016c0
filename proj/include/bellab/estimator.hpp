#pragma once

// Monte Carlo trial engine, correlation estimates, CHSH assembly and
// grid maximization.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "bellab/angle.hpp"
#include "bellab/hvmodels.hpp"
#include "bellab/quantum.hpp"

namespace bellab {

using Source = std::variant<TwoPhotonStated, FactorizedModel, ConditionalModel, AtomizedModel>;

struct TrialRecord {
  std::uint64_t index = 0;
  Angle a;
  Angle b;
  std::optional<HiddenVariable> lambda;  // empty for quantum sources
  OutcomePair outcome;
};

struct CorrelationEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::uint64_t count = 0;
};

/// Estimate from `count` trials whose +-1 products sum to `product_sum`.
CorrelationEstimate make_estimate(std::int64_t product_sum, std::uint64_t count);

/// Trials are split into `partitions` contiguous index ranges, each drawn
/// from its own stream derived from (seed, partition). Results depend on
/// (seed, partitions) only; `workers` sets thread count (0 = hardware).
struct MonteCarloOptions {
  std::uint64_t seed = 0;
  std::size_t partitions = 1;
  std::size_t workers = 0;
};

std::vector<TrialRecord> run_trials(const Source& source, Angle a, Angle b, std::uint64_t n,
                                    const MonteCarloOptions& options);

/// Streaming equivalent of estimate_correlation(run_trials(...)); draws the identical stream.
CorrelationEstimate sample_correlation(const Source& source, Angle a, Angle b, std::uint64_t n,
                                       const MonteCarloOptions& options);

/// Throws on an empty list or records taken at differing settings.
CorrelationEstimate estimate_correlation(std::span<const TrialRecord> records);

/// Exact (Born rule), quadrature, or exact atom-sum correlation.
double analytic_correlation(const Source& source, Angle a, Angle b, QuadratureOptions opts = {});

using CorrelationFn = std::function<double(Angle, Angle)>;

CorrelationFn correlation_function(const Source& source, QuadratureOptions opts = {});

struct ChshQuadruple {
  Angle a;
  Angle a_prime;
  Angle b;
  Angle b_prime;

  /// a = 0, a' = pi/4, b = pi/8, b' = 3pi/8.
  static ChshQuadruple canonical();
};

struct ChshValue {
  double signed_s = 0.0;    // P(a,b) - P(a,b') + P(a',b) + P(a',b')
  double absolute_form = 0.0;  // |P(a,b) - P(a,b')| + |P(a',b') + P(a',b)|
};

ChshValue chsh_from_terms(double p_ab, double p_abp, double p_apb, double p_apbp);

ChshValue chsh(const CorrelationFn& correlation, const ChshQuadruple& q);

struct ChshEstimate {
  ChshValue value;
  double combined_stderr = 0.0;  // root-sum-square of the four term errors
  std::array<CorrelationEstimate, 4> terms;  // (a,b), (a,b'), (a',b), (a',b')
};

/// Monte Carlo CHSH with n trials per setting pair; each pair uses its own sub-seed.
ChshEstimate chsh_monte_carlo(const Source& source, const ChshQuadruple& q, std::uint64_t n,
                              const MonteCarloOptions& options);

struct ScanRow {
  double delta = 0.0;
  double correlation = 0.0;
  std::optional<double> standard_error;
};

/// E(0, delta) for each delta, analytic path.
std::vector<ScanRow> scan_correlation(const Source& source, std::span<const double> deltas,
                                      QuadratureOptions opts = {});

/// E(0, delta) for each delta, Monte Carlo path; row i uses sub-seed i.
std::vector<ScanRow> scan_correlation(const Source& source, std::span<const double> deltas, std::uint64_t n,
                                      const MonteCarloOptions& options);

inline constexpr double kMaxChshGridQuadruples = 1e8;

/// Number of grid points per axis; throws unless step divides pi evenly.
std::size_t grid_points_per_axis(double step);

/// All (a, a', b, b') on the step grid in lexicographic order.
std::vector<ChshQuadruple> chsh_grid(double step);

struct ChshOptimum {
  ChshQuadruple best;
  ChshValue value;
  std::uint64_t quadruples = 0;
};

/// Exhaustive search for the largest absolute-form value; ties go to the
/// lexicographically first quadruple.
ChshOptimum maximize_chsh(const CorrelationFn& correlation, double grid_step);

}  // namespace bellab
