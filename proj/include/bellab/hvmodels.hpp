#pragma once

// Hidden-variable descriptions of a polarization-correlated pair source:
// factorized (each station sees only its own setting and lambda),
// conditional (station A's statistics conditioned on station B's registered
// outcome), and atomized (one distinct lambda per trial, deterministic +-1
// outcomes).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "bellab/angle.hpp"
#include "bellab/exact.hpp"
#include "bellab/quantum.hpp"
#include "bellab/rng.hpp"

namespace bellab {

struct ContinuousLambda {
  double angle = 0.0;  // in [0, pi)
  friend bool operator==(ContinuousLambda, ContinuousLambda) = default;
};

struct AtomLambda {
  std::size_t index = 0;
  friend bool operator==(AtomLambda, AtomLambda) = default;
};

using HiddenVariable = std::variant<ContinuousLambda, AtomLambda>;

/// Uniform density 1/pi on [0, pi).
struct UniformContinuous {};

class DiscreteWeights {
 public:
  /// Weights must be non-negative and sum to one within 1e-12.
  explicit DiscreteWeights(std::vector<double> weights);

  static DiscreteWeights uniform(std::size_t n);

  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return weights_.size(); }

  /// Index i with cumulative(i-1) <= u < cumulative(i); zero-weight atoms are never chosen.
  std::size_t locate(double u) const;

 private:
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

using LambdaDistribution = std::variant<UniformContinuous, DiscreteWeights>;

HiddenVariable sample_lambda(const LambdaDistribution& dist, RandomStream& rng);

struct QuadratureOptions {
  std::size_t points = 4096;
};

inline constexpr std::size_t kMinQuadraturePoints = 16;

/// Deterministic integral of f(lambda) against the distribution: composite
/// midpoint rule on [0, pi) for the continuous case, exact weighted sum for
/// the discrete case.
template <typename F>
double integrate_lambda(const LambdaDistribution& dist, QuadratureOptions opts, F&& f) {
  if (const auto* discrete = std::get_if<DiscreteWeights>(&dist)) {
    double sum = 0.0;
    const auto& w = discrete->weights();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] != 0.0) sum += w[i] * f(HiddenVariable{AtomLambda{i}});
    }
    return sum;
  }
  if (opts.points < kMinQuadraturePoints) {
    throw std::invalid_argument("quadrature grid must have at least 16 points");
  }
  const double h = kPi / static_cast<double>(opts.points);
  double sum = 0.0;
  for (std::size_t k = 0; k < opts.points; ++k) {
    sum += f(HiddenVariable{ContinuousLambda{(static_cast<double>(k) + 0.5) * h}});
  }
  return sum / static_cast<double>(opts.points);
}

/// Station response in [-1, 1]; fractional values are expectations.
using LocalResponse = std::function<double(Angle setting, const HiddenVariable& lambda)>;

struct FactorizedModel {
  LambdaDistribution distribution;
  LocalResponse outcome_a;  // never sees b
  LocalResponse outcome_b;  // never sees a
};

using DetectionProbability = std::function<double(Angle b, const HiddenVariable& lambda)>;
using ConditionalDetection =
    std::function<double(Angle a, Angle b, Outcome side_b, const HiddenVariable& lambda)>;

struct ConditionalModel {
  LambdaDistribution distribution;
  DetectionProbability prob_b;               // P(B = +1 | b, lambda)
  ConditionalDetection prob_a_given_b;       // P(A = +1 | a, b, B, lambda)
};

using OutcomeTable = std::function<Outcome(Angle setting)>;

struct SettingPair {
  Angle a;
  Angle b;
};

/// One trial of a complete-lambda model. If `registered_at` is set the
/// atom belongs only to that setting pair's subsample.
struct Atom {
  std::int64_t lambda_id = 0;
  OutcomeTable outcome_a;
  OutcomeTable outcome_b;
  std::optional<SettingPair> registered_at;
};

class AtomizedModel {
 public:
  /// Throws InvalidModelError on an empty list, a duplicate lambda_id or a missing table.
  explicit AtomizedModel(std::vector<Atom> atoms);

  std::size_t size() const { return atoms_.size(); }
  const Atom& atom(std::size_t i) const { return atoms_.at(i); }
  const std::vector<Atom>& atoms() const { return atoms_; }

  /// Atoms contributing to P(a, b): unregistered atoms plus those registered at (a, b).
  std::vector<std::size_t> atoms_at(Angle a, Angle b) const;

 private:
  std::vector<Atom> atoms_;
};

FactorizedModel make_factorized_sign(Angle orientation_offset = Angle{});
ConditionalModel make_conditional_malus();
AtomizedModel make_atomized(std::vector<Atom> trials);

/// n unregistered atoms (lambda_id 0..n-1) with independent uniform +-1
/// outcome tables over `settings` for both stations.
AtomizedModel random_atomized(std::size_t n, std::span<const Angle> settings, RandomStream& rng);

/// Registered trials, `trials_per_pair` per setting pair, whose subsample
/// correlation at pairs[i] is the closest achievable value to targets[i]
/// (within 1/trials_per_pair). Station A always passes; B carries the product.
AtomizedModel atomize_correlations(std::span<const SettingPair> pairs, std::span<const double> targets,
                                   std::size_t trials_per_pair);

OutcomeTable constant_table(Outcome o);

/// Lookup by orientation; throws std::out_of_range for settings not in the table.
OutcomeTable lookup_table(std::vector<std::pair<Angle, Outcome>> entries);

/// Joint outcome probabilities P(A, B | a, b, lambda) in kOutcomePairs order.
std::array<double, 4> joint_probabilities(const ConditionalModel& model, Angle a, Angle b,
                                          const HiddenVariable& lambda);

double correlation_lhv(const FactorizedModel& model, Angle a, Angle b, QuadratureOptions opts = {});
double correlation_lhv(const ConditionalModel& model, Angle a, Angle b, QuadratureOptions opts = {});
double correlation_lhv(const AtomizedModel& model, Angle a, Angle b);

/// Rational form of the atomized correlation; throws if no atom is registered at (a, b).
ExactRatio correlation_exact(const AtomizedModel& model, Angle a, Angle b);

}  // namespace bellab
