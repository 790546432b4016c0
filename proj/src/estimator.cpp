#include "bellab/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "bellab/errors.hpp"

namespace bellab {

namespace {

struct Draw {
  std::optional<HiddenVariable> lambda;
  OutcomePair outcome;
};

Outcome realize(double expectation, RandomStream& rng) {
  if (expectation == 1.0) return Outcome::pass;
  if (expectation == -1.0) return Outcome::absorb;
  return rng.bernoulli(0.5 * (1.0 + expectation)) ? Outcome::pass : Outcome::absorb;
}

// Per-(source, a, b) sampler; the setup work (Born probabilities, atom
// subsample) happens once per run.
class TrialSampler {
 public:
  TrialSampler(const Source& source, Angle a, Angle b) : source_(source), a_(a), b_(b) {
    if (const auto* state = std::get_if<TwoPhotonStated>(&source_)) {
      qm_probs_ = outcome_probabilities(*state, a, b);
      double acc = 0.0;
      for (std::size_t k = 0; k < qm_probs_.size(); ++k) {
        acc += qm_probs_[k];
        qm_cumulative_[k] = acc;
      }
    } else if (const auto* atomized = std::get_if<AtomizedModel>(&source_)) {
      atoms_ = atomized->atoms_at(a, b);
      if (atoms_.empty()) throw std::invalid_argument("no atom is registered at the requested settings");
    }
  }

  Draw operator()(RandomStream& rng) const {
    return std::visit([&](const auto& s) { return draw(s, rng); }, source_);
  }

 private:
  Draw draw(const TwoPhotonStated&, RandomStream& rng) const {
    const double u = rng.uniform();
    for (std::size_t k = 0; k < 4; ++k) {
      if (qm_probs_[k] > 0.0 && u < qm_cumulative_[k]) return {std::nullopt, kOutcomePairs[k]};
    }
    // the cumulative total can round to just below 1
    std::size_t k = 3;
    while (k > 0 && !(qm_probs_[k] > 0.0)) --k;
    return {std::nullopt, kOutcomePairs[k]};
  }

  Draw draw(const FactorizedModel& m, RandomStream& rng) const {
    auto lambda = sample_lambda(m.distribution, rng);
    const Outcome oa = realize(m.outcome_a(a_, lambda), rng);
    const Outcome ob = realize(m.outcome_b(b_, lambda), rng);
    return {std::move(lambda), {oa, ob}};
  }

  Draw draw(const ConditionalModel& m, RandomStream& rng) const {
    auto lambda = sample_lambda(m.distribution, rng);
    const Outcome ob = rng.bernoulli(m.prob_b(b_, lambda)) ? Outcome::pass : Outcome::absorb;
    const Outcome oa = rng.bernoulli(m.prob_a_given_b(a_, b_, ob, lambda)) ? Outcome::pass : Outcome::absorb;
    return {std::move(lambda), {oa, ob}};
  }

  Draw draw(const AtomizedModel& m, RandomStream& rng) const {
    const auto pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(atoms_.size()));
    const std::size_t i = atoms_[std::min(pick, atoms_.size() - 1)];
    const auto& atom = m.atom(i);
    return {HiddenVariable{AtomLambda{i}}, {atom.outcome_a(a_), atom.outcome_b(b_)}};
  }

  const Source& source_;
  Angle a_;
  Angle b_;
  std::array<double, 4> qm_probs_{};
  std::array<double, 4> qm_cumulative_{};
  std::vector<std::size_t> atoms_;
};

struct PartitionRange {
  std::uint64_t begin;
  std::uint64_t end;
};

PartitionRange partition_range(std::uint64_t n, std::size_t partitions, std::size_t p) {
  const auto k = static_cast<std::uint64_t>(partitions);
  return {n * p / k, n * (p + 1) / k};
}

void validate(std::uint64_t n, const MonteCarloOptions& options) {
  if (n == 0) throw std::invalid_argument("trial count must be positive");
  if (options.partitions == 0) throw std::invalid_argument("partition count must be positive");
}

// Runs body(p) for every partition p on up to `workers` threads.
template <typename Body>
void for_each_partition(const MonteCarloOptions& options, Body&& body) {
  std::size_t workers = options.workers;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, options.partitions);
  if (workers <= 1) {
    for (std::size_t p = 0; p < options.partitions; ++p) body(p);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          for (std::size_t p = w; p < options.partitions; p += workers) body(p);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

MonteCarloOptions sub_run(const MonteCarloOptions& options, std::uint64_t index) {
  MonteCarloOptions sub = options;
  sub.seed = derive_seed(options.seed, index);
  return sub;
}

}  // namespace

CorrelationEstimate make_estimate(std::int64_t product_sum, std::uint64_t count) {
  if (count == 0) throw std::invalid_argument("correlation estimate needs at least one trial");
  CorrelationEstimate e;
  e.count = count;
  e.mean = static_cast<double>(product_sum) / static_cast<double>(count);
  e.standard_error = std::sqrt(std::max(0.0, 1.0 - e.mean * e.mean) / static_cast<double>(count));
  return e;
}

std::vector<TrialRecord> run_trials(const Source& source, Angle a, Angle b, std::uint64_t n,
                                    const MonteCarloOptions& options) {
  validate(n, options);
  const TrialSampler sampler(source, a, b);
  std::vector<TrialRecord> records(n);
  for_each_partition(options, [&](std::size_t p) {
    RandomStream rng(options.seed, p);
    const auto range = partition_range(n, options.partitions, p);
    for (std::uint64_t i = range.begin; i < range.end; ++i) {
      auto d = sampler(rng);
      records[i] = TrialRecord{i, a, b, std::move(d.lambda), d.outcome};
    }
  });
  return records;
}

CorrelationEstimate sample_correlation(const Source& source, Angle a, Angle b, std::uint64_t n,
                                       const MonteCarloOptions& options) {
  validate(n, options);
  const TrialSampler sampler(source, a, b);
  std::vector<std::int64_t> sums(options.partitions, 0);
  for_each_partition(options, [&](std::size_t p) {
    RandomStream rng(options.seed, p);
    const auto range = partition_range(n, options.partitions, p);
    std::int64_t s = 0;
    for (std::uint64_t i = range.begin; i < range.end; ++i) s += sampler(rng).outcome.product();
    sums[p] = s;
  });
  std::int64_t total = 0;
  for (std::int64_t s : sums) total += s;
  return make_estimate(total, n);
}

CorrelationEstimate estimate_correlation(std::span<const TrialRecord> records) {
  if (records.empty()) throw std::invalid_argument("no trial records");
  const Angle a = records.front().a;
  const Angle b = records.front().b;
  std::int64_t sum = 0;
  for (const auto& r : records) {
    if (!(r.a == a) || !(r.b == b)) throw std::invalid_argument("trial records mix different settings");
    sum += r.outcome.product();
  }
  return make_estimate(sum, records.size());
}

double analytic_correlation(const Source& source, Angle a, Angle b, QuadratureOptions opts) {
  struct Visitor {
    Angle a;
    Angle b;
    QuadratureOptions opts;
    double operator()(const TwoPhotonStated& s) const { return correlation_qm(s, a, b); }
    double operator()(const FactorizedModel& m) const { return correlation_lhv(m, a, b, opts); }
    double operator()(const ConditionalModel& m) const { return correlation_lhv(m, a, b, opts); }
    double operator()(const AtomizedModel& m) const { return correlation_lhv(m, a, b); }
  };
  return std::visit(Visitor{a, b, opts}, source);
}

CorrelationFn correlation_function(const Source& source, QuadratureOptions opts) {
  return [source, opts](Angle a, Angle b) { return analytic_correlation(source, a, b, opts); };
}

ChshQuadruple ChshQuadruple::canonical() {
  return {Angle(0.0), Angle(kPi / 4.0), Angle(kPi / 8.0), Angle(3.0 * kPi / 8.0)};
}

ChshValue chsh_from_terms(double p_ab, double p_abp, double p_apb, double p_apbp) {
  return {p_ab - p_abp + p_apb + p_apbp, std::abs(p_ab - p_abp) + std::abs(p_apbp + p_apb)};
}

ChshValue chsh(const CorrelationFn& correlation, const ChshQuadruple& q) {
  return chsh_from_terms(correlation(q.a, q.b), correlation(q.a, q.b_prime), correlation(q.a_prime, q.b),
                         correlation(q.a_prime, q.b_prime));
}

ChshEstimate chsh_monte_carlo(const Source& source, const ChshQuadruple& q, std::uint64_t n,
                              const MonteCarloOptions& options) {
  const std::array<std::pair<Angle, Angle>, 4> pairs = {
      {{q.a, q.b}, {q.a, q.b_prime}, {q.a_prime, q.b}, {q.a_prime, q.b_prime}}};
  ChshEstimate est;
  double var = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    est.terms[i] = sample_correlation(source, pairs[i].first, pairs[i].second, n, sub_run(options, i));
    var += est.terms[i].standard_error * est.terms[i].standard_error;
  }
  est.value = chsh_from_terms(est.terms[0].mean, est.terms[1].mean, est.terms[2].mean, est.terms[3].mean);
  est.combined_stderr = std::sqrt(var);
  return est;
}

std::vector<ScanRow> scan_correlation(const Source& source, std::span<const double> deltas,
                                      QuadratureOptions opts) {
  if (deltas.empty()) throw std::invalid_argument("delta grid is empty");
  std::vector<ScanRow> rows;
  rows.reserve(deltas.size());
  for (double d : deltas) rows.push_back({d, analytic_correlation(source, Angle(0.0), Angle(d), opts), std::nullopt});
  return rows;
}

std::vector<ScanRow> scan_correlation(const Source& source, std::span<const double> deltas, std::uint64_t n,
                                      const MonteCarloOptions& options) {
  if (deltas.empty()) throw std::invalid_argument("delta grid is empty");
  std::vector<ScanRow> rows;
  rows.reserve(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const auto e = sample_correlation(source, Angle(0.0), Angle(deltas[i]), n, sub_run(options, i));
    rows.push_back({deltas[i], e.mean, e.standard_error});
  }
  return rows;
}

std::size_t grid_points_per_axis(double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("grid step must be positive");
  const double ratio = kPi / step;
  const double k = std::round(ratio);
  if (k < 1.0 || std::abs(ratio - k) > 1e-9 * ratio) {
    throw std::invalid_argument("grid step must divide pi evenly");
  }
  if (k * k * k * k > kMaxChshGridQuadruples) {
    throw std::invalid_argument("setting grid exceeds 1e8 quadruples");
  }
  return static_cast<std::size_t>(k);
}

std::vector<ChshQuadruple> chsh_grid(double step) {
  const std::size_t k = grid_points_per_axis(step);
  std::vector<ChshQuadruple> grid;
  grid.reserve(k * k * k * k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t l = 0; l < k; ++l)
        for (std::size_t m = 0; m < k; ++m)
          grid.push_back({Angle(static_cast<double>(i) * step), Angle(static_cast<double>(j) * step),
                          Angle(static_cast<double>(l) * step), Angle(static_cast<double>(m) * step)});
  return grid;
}

ChshOptimum maximize_chsh(const CorrelationFn& correlation, double grid_step) {
  const std::size_t k = grid_points_per_axis(grid_step);
  std::vector<Angle> axis(k);
  for (std::size_t i = 0; i < k; ++i) axis[i] = Angle(static_cast<double>(i) * grid_step);

  // E[i * k + j] = P(axis[i], axis[j])
  std::vector<double> table(k * k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) table[i * k + j] = correlation(axis[i], axis[j]);

  ChshOptimum best;
  bool first = true;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t ip = 0; ip < k; ++ip)
      for (std::size_t j = 0; j < k; ++j)
        for (std::size_t jp = 0; jp < k; ++jp) {
          const auto v = chsh_from_terms(table[i * k + j], table[i * k + jp], table[ip * k + j], table[ip * k + jp]);
          // ties within 1e-12 keep the lexicographically earlier quadruple
          if (first || v.absolute_form > best.value.absolute_form + 1e-12) {
            best.best = {axis[i], axis[ip], axis[j], axis[jp]};
            best.value = v;
            first = false;
          }
        }
  best.quadruples = static_cast<std::uint64_t>(k) * k * k * k;
  return best;
}

}  // namespace bellab
