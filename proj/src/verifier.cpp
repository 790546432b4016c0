#include "bellab/verifier.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

namespace bellab {

namespace {

int atom_product(const Atom& atom, Angle a, Angle b) {
  return sign_of(atom.outcome_a(a)) * sign_of(atom.outcome_b(b));
}

int cross_term_numerator(const AtomizedModel& model, std::size_t n, std::size_t m, Angle a, Angle a_prime,
                         Angle b, Angle b_prime) {
  if (n != m) return 0;
  const auto& atom = model.atom(n);
  return atom_product(atom, a, b) * atom_product(atom, a_prime, b_prime);
}

// Caches P(a, b) by orientation so grid sweeps integrate each pair once.
class CorrelationCache {
 public:
  CorrelationCache(const FactorizedModel& model, QuadratureOptions opts) : model_(model), opts_(opts) {}

  double operator()(Angle a, Angle b) {
    const auto key = std::make_pair(a.value(), b.value());
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const double v = correlation_lhv(model_, a, b, opts_);
    cache_.emplace(key, v);
    return v;
  }

 private:
  const FactorizedModel& model_;
  QuadratureOptions opts_;
  std::map<std::pair<double, double>, double> cache_;
};

ExactRatio sum_cross_terms(const AtomizedModel& model, const std::vector<std::size_t>& first,
                           const std::vector<std::size_t>& second, Angle a, Angle a_prime, Angle b, Angle b_prime,
                           std::uint64_t& pairs, std::uint64_t& nonzero_cross) {
  std::int64_t numerator = 0;
  for (std::size_t n : first) {
    for (std::size_t m : second) {
      const int t = cross_term_numerator(model, n, m, a, a_prime, b, b_prime);
      ++pairs;
      if (n != m && t != 0) ++nonzero_cross;
      numerator += t;
    }
  }
  return ExactRatio(numerator, static_cast<std::int64_t>(model.size()));
}

}  // namespace

std::vector<HiddenVariable> lambda_nodes(const LambdaDistribution& dist, QuadratureOptions opts) {
  std::vector<HiddenVariable> nodes;
  integrate_lambda(dist, opts, [&](const HiddenVariable& lambda) {
    nodes.push_back(lambda);
    return 0.0;
  });
  return nodes;
}

BoundsReport check_bounds(const FactorizedModel& model, std::span<const Angle> settings,
                          std::span<const HiddenVariable> lambdas) {
  if (settings.empty() || lambdas.empty()) throw std::invalid_argument("bounds check needs non-empty grids");
  BoundsReport report;
  for (const auto& setting : settings) {
    for (const auto& lambda : lambdas) {
      const double va = model.outcome_a(setting, lambda);
      const double vb = model.outcome_b(setting, lambda);
      if (!(std::abs(va) <= 1.0)) report.violations.push_back({Station::a, setting, lambda, va});
      if (!(std::abs(vb) <= 1.0)) report.violations.push_back({Station::b, setting, lambda, vb});
      report.points_checked += 2;
    }
  }
  return report;
}

double check_zero_identity(std::array<double, 2> a_values, std::array<double, 2> b_values) {
  const auto [aa, aap] = a_values;
  const auto [bb, bbp] = b_values;
  return aa * bb * aap * bbp - aa * bbp * aap * bb;
}

StepSsReport check_step_ss(const FactorizedModel& model, const ChshQuadruple& q, int sign, QuadratureOptions opts) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
  StepSsReport r;
  r.sign = sign;
  const double s = static_cast<double>(sign);
  r.left = std::abs(correlation_lhv(model, q.a, q.b, opts) - correlation_lhv(model, q.a, q.b_prime, opts));
  const double first = integrate_lambda(model.distribution, opts, [&](const HiddenVariable& lambda) {
    return 1.0 + s * model.outcome_a(q.a_prime, lambda) * model.outcome_b(q.b_prime, lambda);
  });
  const double second = integrate_lambda(model.distribution, opts, [&](const HiddenVariable& lambda) {
    return 1.0 + s * model.outcome_a(q.a_prime, lambda) * model.outcome_b(q.b, lambda);
  });
  r.right = first + second;
  r.holds = r.left <= r.right + kChainTolerance;
  return r;
}

BellReport check_bell_inequality(const FactorizedModel& model, std::span<const ChshQuadruple> grid,
                                 QuadratureOptions opts) {
  if (grid.empty()) throw std::invalid_argument("quadruple grid is empty");
  CorrelationCache p(model, opts);
  BellReport report;
  bool first = true;
  for (const auto& q : grid) {
    const double v = chsh_from_terms(p(q.a, q.b), p(q.a, q.b_prime), p(q.a_prime, q.b), p(q.a_prime, q.b_prime)).absolute_form;
    if (first || v > report.max_value + 1e-12) {
      report.max_value = v;
      report.attaining = q;
      first = false;
    }
  }
  report.quadruples = grid.size();
  report.holds = report.max_value <= kLocalBound + kChainTolerance;
  return report;
}

ExactRatio cross_term_integral(const AtomizedModel& model, std::size_t n, std::size_t m, Angle a, Angle a_prime,
                               Angle b, Angle b_prime) {
  if (n >= model.size() || m >= model.size()) throw std::out_of_range("atom index out of range");
  return ExactRatio(cross_term_numerator(model, n, m, a, a_prime, b, b_prime), static_cast<std::int64_t>(model.size()));
}

DegenerateReport check_degenerate_inequality(const AtomizedModel& model, std::span<const ChshQuadruple> grid) {
  if (grid.empty()) throw std::invalid_argument("quadruple grid is empty");
  const ExactRatio two(2, 1);
  DegenerateReport report;
  bool first = true;
  for (const auto& q : grid) {
    DegenerateEntry e;
    e.quadruple = q;
    e.p_ab = correlation_exact(model, q.a, q.b);
    e.p_abp = correlation_exact(model, q.a, q.b_prime);
    e.p_apb = correlation_exact(model, q.a_prime, q.b);
    e.p_apbp = correlation_exact(model, q.a_prime, q.b_prime);

    const auto s_ab = model.atoms_at(q.a, q.b);
    const auto s_abp = model.atoms_at(q.a, q.b_prime);
    const auto s_apb = model.atoms_at(q.a_prime, q.b);
    const auto s_apbp = model.atoms_at(q.a_prime, q.b_prime);
    e.quadruple_term_first =
        sum_cross_terms(model, s_ab, s_apbp, q.a, q.a_prime, q.b, q.b_prime, e.atom_pairs, e.nonzero_cross_pairs);
    e.quadruple_term_second =
        sum_cross_terms(model, s_abp, s_apb, q.a, q.a_prime, q.b_prime, q.b, e.atom_pairs, e.nonzero_cross_pairs);

    const ExactRatio lhs = e.p_ab - e.p_abp;
    const ExactRatio quad = e.quadruple_term_first - e.quadruple_term_second;
    e.rhs_plus = lhs + quad;
    e.rhs_minus = lhs - quad;
    // with quadruple terms equal (same atom) or absent (disjoint trials) the chain is exact
    e.chain_consistent = quad.is_zero();

    e.degenerate_value = e.p_ab.abs() + e.p_apbp.abs();
    e.degenerate_holds = e.degenerate_value <= two;
    e.standard_value = chsh_from_terms(e.p_ab.value(), e.p_abp.value(), e.p_apb.value(), e.p_apbp.value()).absolute_form;
    e.standard_exceeds_bound = e.standard_value > kLocalBound + kChainTolerance;
    e.uncertified_excess = std::max(0.0, e.standard_value - kLocalBound);

    report.cross_terms_vanish = report.cross_terms_vanish && e.nonzero_cross_pairs == 0;
    report.degenerate_holds = report.degenerate_holds && e.degenerate_holds;
    report.chain_consistent = report.chain_consistent && e.chain_consistent;
    report.max_standard = first ? e.standard_value : std::max(report.max_standard, e.standard_value);
    if (first || !(e.degenerate_value <= report.max_degenerate)) report.max_degenerate = e.degenerate_value;
    first = false;
    report.entries.push_back(std::move(e));
  }
  return report;
}

}  // namespace bellab
