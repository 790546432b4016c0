#include "bellab/hvmodels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "bellab/errors.hpp"

namespace bellab {

namespace {

double lambda_angle(const HiddenVariable& lambda) {
  if (const auto* c = std::get_if<ContinuousLambda>(&lambda)) return c->angle;
  throw InvalidModelError("model expects a continuous polarization lambda");
}

// sign(0) is +1
double unit_sign(double x) { return x >= 0.0 ? 1.0 : -1.0; }

double square(double x) { return x * x; }

}  // namespace

DiscreteWeights::DiscreteWeights(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw InvalidModelError("discrete lambda distribution needs at least one weight");
  double total = 0.0;
  cumulative_.reserve(weights_.size());
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidModelError("lambda weights must be finite and non-negative");
    total += w;
    cumulative_.push_back(total);
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidModelError("lambda weights must sum to 1");
}

DiscreteWeights DiscreteWeights::uniform(std::size_t n) {
  if (n == 0) throw InvalidModelError("discrete lambda distribution needs at least one weight");
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  // absorb rounding so the sum check is exact enough for any n
  const double partial = std::accumulate(w.begin(), w.end() - 1, 0.0);
  w.back() = 1.0 - partial;
  return DiscreteWeights(std::move(w));
}

std::size_t DiscreteWeights::locate(double u) const {
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it != cumulative_.end()) return static_cast<std::size_t>(it - cumulative_.begin());
  // u at or above a total slightly below 1: take the last atom with weight
  for (std::size_t i = weights_.size(); i-- > 0;) {
    if (weights_[i] > 0.0) return i;
  }
  return weights_.size() - 1;
}

HiddenVariable sample_lambda(const LambdaDistribution& dist, RandomStream& rng) {
  if (const auto* discrete = std::get_if<DiscreteWeights>(&dist)) {
    return AtomLambda{discrete->locate(rng.uniform())};
  }
  return ContinuousLambda{rng.uniform() * kPi};
}

AtomizedModel::AtomizedModel(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw InvalidModelError("atomized model needs at least one trial");
  std::unordered_set<std::int64_t> seen;
  for (const auto& atom : atoms_) {
    if (!atom.outcome_a || !atom.outcome_b) throw InvalidModelError("atom is missing an outcome table");
    if (!seen.insert(atom.lambda_id).second) {
      throw InvalidModelError("duplicate lambda_id " + std::to_string(atom.lambda_id) +
                              ": distinct trials must have distinct hidden variables");
    }
  }
}

std::vector<std::size_t> AtomizedModel::atoms_at(Angle a, Angle b) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const auto& reg = atoms_[i].registered_at;
    if (!reg || (same_orientation(reg->a, a) && same_orientation(reg->b, b))) idx.push_back(i);
  }
  return idx;
}

FactorizedModel make_factorized_sign(Angle orientation_offset) {
  const double offset = orientation_offset.value();
  FactorizedModel model;
  model.distribution = UniformContinuous{};
  model.outcome_a = [](Angle a, const HiddenVariable& lambda) {
    return unit_sign(std::cos(2.0 * (a.value() - lambda_angle(lambda))));
  };
  model.outcome_b = [offset](Angle b, const HiddenVariable& lambda) {
    return -unit_sign(std::cos(2.0 * (b.value() - lambda_angle(lambda) - offset)));
  };
  return model;
}

ConditionalModel make_conditional_malus() {
  ConditionalModel model;
  model.distribution = UniformContinuous{};
  model.prob_b = [](Angle b, const HiddenVariable& lambda) {
    return square(std::cos(b.value() - lambda_angle(lambda)));
  };
  model.prob_a_given_b = [](Angle a, Angle b, Outcome side_b, const HiddenVariable&) {
    const double rel = a.value() - b.value();
    return side_b == Outcome::pass ? square(std::cos(rel)) : square(std::sin(rel));
  };
  return model;
}

AtomizedModel make_atomized(std::vector<Atom> trials) { return AtomizedModel(std::move(trials)); }

AtomizedModel random_atomized(std::size_t n, std::span<const Angle> settings, RandomStream& rng) {
  if (settings.empty()) throw std::invalid_argument("random outcome tables need at least one setting");
  auto random_table = [&] {
    std::vector<std::pair<Angle, Outcome>> entries;
    entries.reserve(settings.size());
    for (Angle s : settings) entries.emplace_back(s, rng.bernoulli(0.5) ? Outcome::pass : Outcome::absorb);
    return lookup_table(std::move(entries));
  };
  std::vector<Atom> atoms;
  atoms.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Atom atom;
    atom.lambda_id = static_cast<std::int64_t>(i);
    atom.outcome_a = random_table();
    atom.outcome_b = random_table();
    atoms.push_back(std::move(atom));
  }
  return AtomizedModel(std::move(atoms));
}

AtomizedModel atomize_correlations(std::span<const SettingPair> pairs, std::span<const double> targets,
                                   std::size_t trials_per_pair) {
  if (pairs.size() != targets.size()) throw std::invalid_argument("one target correlation per setting pair");
  if (pairs.empty() || trials_per_pair == 0) throw InvalidModelError("atomized model needs at least one trial");
  std::vector<Atom> atoms;
  atoms.reserve(pairs.size() * trials_per_pair);
  std::int64_t next_id = 0;
  const auto n = static_cast<double>(trials_per_pair);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double e = std::clamp(targets[i], -1.0, 1.0);
    // `agree` trials with product +1 give correlation (2 agree - n) / n
    const auto agree = static_cast<std::size_t>(std::llround(0.5 * n * (1.0 + e)));
    for (std::size_t t = 0; t < trials_per_pair; ++t) {
      Atom atom;
      atom.lambda_id = next_id++;
      atom.outcome_a = constant_table(Outcome::pass);
      atom.outcome_b = constant_table(t < agree ? Outcome::pass : Outcome::absorb);
      atom.registered_at = pairs[i];
      atoms.push_back(std::move(atom));
    }
  }
  return AtomizedModel(std::move(atoms));
}

OutcomeTable constant_table(Outcome o) {
  return [o](Angle) { return o; };
}

OutcomeTable lookup_table(std::vector<std::pair<Angle, Outcome>> entries) {
  return [entries = std::move(entries)](Angle setting) {
    for (const auto& [angle, outcome] : entries) {
      if (same_orientation(angle, setting)) return outcome;
    }
    throw std::out_of_range("outcome table has no entry for setting " + std::to_string(setting.value()));
  };
}

std::array<double, 4> joint_probabilities(const ConditionalModel& model, Angle a, Angle b,
                                          const HiddenVariable& lambda) {
  const double pb = model.prob_b(b, lambda);
  const double pa_plus = model.prob_a_given_b(a, b, Outcome::pass, lambda);
  const double pa_minus = model.prob_a_given_b(a, b, Outcome::absorb, lambda);
  return {pa_plus * pb, pa_minus * (1.0 - pb), (1.0 - pa_plus) * pb, (1.0 - pa_minus) * (1.0 - pb)};
}

double correlation_lhv(const FactorizedModel& model, Angle a, Angle b, QuadratureOptions opts) {
  return integrate_lambda(model.distribution, opts, [&](const HiddenVariable& lambda) {
    return model.outcome_a(a, lambda) * model.outcome_b(b, lambda);
  });
}

double correlation_lhv(const ConditionalModel& model, Angle a, Angle b, QuadratureOptions opts) {
  return integrate_lambda(model.distribution, opts, [&](const HiddenVariable& lambda) {
    const auto p = joint_probabilities(model, a, b, lambda);
    return (p[0] + p[3]) - (p[1] + p[2]);
  });
}

ExactRatio correlation_exact(const AtomizedModel& model, Angle a, Angle b) {
  const auto idx = model.atoms_at(a, b);
  if (idx.empty()) throw std::invalid_argument("no atom is registered at the requested settings");
  std::int64_t sum = 0;
  for (std::size_t i : idx) {
    const auto& atom = model.atom(i);
    sum += sign_of(atom.outcome_a(a)) * sign_of(atom.outcome_b(b));
  }
  return ExactRatio(sum, static_cast<std::int64_t>(idx.size()));
}

double correlation_lhv(const AtomizedModel& model, Angle a, Angle b) {
  return correlation_exact(model, a, b).value();
}

}  // namespace bellab
