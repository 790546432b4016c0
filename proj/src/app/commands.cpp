#include "bellab/app/commands.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "bellab/app/format.hpp"
#include "bellab/errors.hpp"
#include "bellab/verifier.hpp"

namespace bellab::app {

using nlohmann::json;

namespace {

json quadruple_json(const ChshQuadruple& q) {
  return {{"a", q.a.value()}, {"a_prime", q.a_prime.value()}, {"b", q.b.value()}, {"b_prime", q.b_prime.value()}};
}

json optional_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

std::string ratio_text(const ExactRatio& r) {
  return std::to_string(r.numerator) + "/" + std::to_string(r.denominator);
}

MonteCarloOptions mc_options(const SamplingConfig& s) {
  return {.seed = s.seed.value_or(0), .partitions = s.partitions, .workers = s.workers};
}

json sampling_json(const SamplingConfig& s) {
  // worker count is deliberately omitted: it never changes results
  json j = {{"trials", s.trials}, {"seed", s.seed ? json(*s.seed) : json(nullptr)}};
  if (s.trials > 0) {
    j["partitions"] = s.partitions;
  } else {
    j["quadrature_points"] = s.quadrature_points;
  }
  return j;
}

std::vector<Angle> axis(double step) {
  const std::size_t k = grid_points_per_axis(step);
  std::vector<Angle> out;
  for (std::size_t i = 0; i < k; ++i) out.emplace_back(static_cast<double>(i) * step);
  return out;
}

ChshQuadruple random_quadruple(RandomStream& rng) {
  auto draw = [&] { return Angle(rng.uniform() * kPi); };
  const Angle a = draw(), ap = draw(), b = draw(), bp = draw();
  return {a, ap, b, bp};
}

std::string fixed(double x, int digits = 6) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(digits);
  os << x;
  return os.str();
}

// ---- verify ----------------------------------------------------------------

struct Record {
  std::string check;
  std::string relation;
  json inputs;
  double value;
  double bound;
  bool pass;
};

json record_json(const Record& r) {
  return {{"check", r.check}, {"paper_eq", r.relation}, {"inputs", r.inputs},
          {"value", r.value}, {"bound", r.bound},       {"pass", r.pass}};
}

constexpr const char* kBoundsRelation = "|A(a,lambda)| <= 1, |B(b,lambda)| <= 1";
constexpr const char* kChshRelation = "|P(a,b) - P(a,b')| + |P(a',b') + P(a',b)| <= 2";
constexpr const char* kDegenerateRelation = "|P(a,b)| + |P(a',b')| <= 2";

double max_magnitude(const FactorizedModel& model, std::span<const Angle> settings,
                     std::span<const HiddenVariable> nodes) {
  double m = 0.0;
  for (Angle s : settings)
    for (const auto& l : nodes) m = std::max({m, std::abs(model.outcome_a(s, l)), std::abs(model.outcome_b(s, l))});
  return m;
}

class VerifySuite {
 public:
  explicit VerifySuite(const VerifyConfig& cfg) : cfg_(cfg), seed_(*cfg.seed), quad_{cfg.quadrature_points} {}

  void run(const std::string& name, std::vector<Record>& out) {
    if (name == "bounds") return bounds(out, false);
    if (name == "bounds-violation-demo") return bounds(out, true);
    if (name == "zero-identity") return zero_identity(out);
    if (name == "step-ss") return step_ss(out);
    if (name == "bell") return bell(out);
    if (name == "chsh-consistency") return consistency(out);
    if (name == "cross-terms") return cross_terms(out);
    if (name == "degenerate") return degenerate(out);
    if (name == "degenerate-singlet-demo") return singlet_demo(out);
    if (name == "conditional-demo") return conditional_demo(out);
    throw ConfigError("unknown check \"" + name + "\"");
  }

 private:
  void bounds(std::vector<Record>& out, bool demo) const {
    FactorizedModel model = make_factorized_sign();
    if (demo) {
      model.outcome_a = [](Angle, const HiddenVariable&) { return 1.5; };
      model.outcome_b = [](Angle, const HiddenVariable&) { return 1.0; };
    }
    const auto settings = axis(cfg_.grid_step);
    const auto nodes = lambda_nodes(model.distribution, quad_);
    const auto report = check_bounds(model, settings, nodes);
    const double magnitude = max_magnitude(model, settings, nodes);
    json inputs = {{"model", demo ? "constant A = 1.5, B = 1" : "factorized-sign"},
                   {"settings", settings.size()},
                   {"lambda_nodes", nodes.size()},
                   {"points_checked", report.points_checked},
                   {"violations", report.violations.size()}};
    if (demo) {
      inputs["expect"] = "violations reported";
      out.push_back({"bounds-violation-demo", kBoundsRelation, inputs, magnitude, 1.0, !report.pass()});
    } else {
      out.push_back({"bounds", kBoundsRelation, inputs, magnitude, 1.0, report.pass() && magnitude <= 1.0});
    }
  }

  void zero_identity(std::vector<Record>& out) const {
    RandomStream rng(seed_, 2);
    auto u = [&] { return 2.0 * rng.uniform() - 1.0; };
    double worst = 0.0;
    for (std::uint64_t i = 0; i < cfg_.zero_identity_draws; ++i) {
      const std::array<double, 2> a = {u(), u()};
      const std::array<double, 2> b = {u(), u()};
      worst = std::max(worst, std::abs(check_zero_identity(a, b)));
    }
    out.push_back({"zero-identity", "A(a)B(b)A(a')B(b') - A(a)B(b')A(a')B(b) = 0",
                   {{"draws", cfg_.zero_identity_draws}, {"range", "[-1, 1]"}, {"seed", seed_}}, worst, 1e-12,
                   worst <= 1e-12});
  }

  void step_ss(std::vector<Record>& out) const {
    const auto model = make_factorized_sign();
    RandomStream rng(seed_, 3);
    std::vector<ChshQuadruple> quads = {ChshQuadruple::canonical()};
    for (std::size_t i = 0; i < cfg_.ss_quadruples; ++i) quads.push_back(random_quadruple(rng));
    double worst = -std::numeric_limits<double>::infinity();
    bool holds = true;
    for (const auto& q : quads) {
      for (int sign : {1, -1}) {
        const auto r = check_step_ss(model, q, sign, quad_);
        worst = std::max(worst, r.left - r.right);
        holds = holds && r.holds;
      }
    }
    out.push_back({"step-ss", "|P(a,b) - P(a,b')| <= int rho [1 +- A(a')B(b')] + int rho [1 +- A(a')B(b)]",
                   {{"model", "factorized-sign"},
                    {"quadruples", quads.size()},
                    {"signs", {1, -1}},
                    {"measure", "max(left - right)"},
                    {"quadrature_points", cfg_.quadrature_points},
                    {"seed", seed_}},
                   worst, kChainTolerance, holds});
  }

  void bell(std::vector<Record>& out) const {
    const auto grid = chsh_grid(cfg_.grid_step);
    const auto r = check_bell_inequality(make_factorized_sign(), grid, quad_);
    out.push_back({"bell", kChshRelation,
                   {{"model", "factorized-sign"},
                    {"grid_step_rad", cfg_.grid_step},
                    {"quadruples", r.quadruples},
                    {"attaining", quadruple_json(r.attaining)},
                    {"quadrature_points", cfg_.quadrature_points}},
                   r.max_value, kLocalBound, r.holds});
  }

  void consistency(std::vector<Record>& out) const {
    const auto model = make_factorized_sign();
    const auto estimator_side = correlation_function(Source{model}, quad_);
    RandomStream rng(seed_, 4);
    std::vector<ChshQuadruple> quads = {ChshQuadruple::canonical()};
    for (int i = 0; i < 20; ++i) quads.push_back(random_quadruple(rng));
    double worst = 0.0;
    for (const auto& q : quads) {
      const std::array<ChshQuadruple, 1> one = {q};
      worst = std::max(worst, std::abs(check_bell_inequality(model, one, quad_).max_value -
                                       chsh(estimator_side, q).absolute_form));
    }
    out.push_back({"chsh-consistency", kChshRelation,
                   {{"model", "factorized-sign"},
                    {"quadruples", quads.size()},
                    {"measure", "max |verifier - estimator|"},
                    {"seed", seed_}},
                   worst, kChainTolerance, worst <= kChainTolerance});
  }

  void cross_terms(std::vector<Record>& out) const {
    const auto q = ChshQuadruple::canonical();
    const std::vector<Angle> settings = {q.a, q.a_prime, q.b, q.b_prime};
    for (std::size_t n : cfg_.atomized_sizes) {
      RandomStream rng(seed_, 100 + n);
      const auto model = random_atomized(n, settings, rng);
      std::uint64_t nonzero = 0;
      bool diagonal_ok = true;
      double worst = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const auto t = cross_term_integral(model, i, j, q.a, q.a_prime, q.b, q.b_prime);
          if (i != j) {
            nonzero += t.is_zero() ? 0 : 1;
            worst = std::max(worst, std::abs(t.value()));
          } else {
            const auto& atom = model.atom(i);
            const int prod = sign_of(atom.outcome_a(q.a)) * sign_of(atom.outcome_b(q.b)) *
                             sign_of(atom.outcome_a(q.a_prime)) * sign_of(atom.outcome_b(q.b_prime));
            diagonal_ok = diagonal_ok && t == ExactRatio(prod, static_cast<std::int64_t>(n));
          }
        }
      }
      out.push_back({"cross-terms", "sum_lambda w(lambda) [A(a)B(b)]_n [A(a')B(b')]_m = 0 for n != m",
                     {{"atoms", n},
                      {"cross_pairs", n * (n - 1)},
                      {"nonzero_cross_pairs", nonzero},
                      {"diagonal_equals_weight_times_product", diagonal_ok},
                      {"arithmetic", "exact"},
                      {"seed", seed_}},
                     worst, 0.0, nonzero == 0 && diagonal_ok});
    }
  }

  void degenerate(std::vector<Record>& out) const {
    const auto settings = axis(cfg_.grid_step);
    const auto grid = chsh_grid(cfg_.grid_step);
    for (std::size_t n : cfg_.atomized_sizes) {
      RandomStream rng(seed_, 200 + n);
      const auto r = check_degenerate_inequality(random_atomized(n, settings, rng), grid);
      out.push_back({"degenerate", kDegenerateRelation,
                     {{"atoms", n},
                      {"quadruples", grid.size()},
                      {"max_degenerate_exact", ratio_text(r.max_degenerate)},
                      {"max_standard", r.max_standard},
                      {"cross_terms_vanish", r.cross_terms_vanish},
                      {"chain_consistent", r.chain_consistent},
                      {"seed", seed_}},
                     r.max_degenerate.value(), kLocalBound,
                     r.degenerate_holds && r.cross_terms_vanish && r.chain_consistent});
    }
  }

  void singlet_demo(std::vector<Record>& out) const {
    const auto q = ChshQuadruple::canonical();
    const std::vector<SettingPair> pairs = {{q.a, q.b}, {q.a, q.b_prime}, {q.a_prime, q.b}, {q.a_prime, q.b_prime}};
    const auto singlet = make_singlet();
    std::vector<double> targets;
    for (const auto& p : pairs) targets.push_back(correlation_qm(singlet, p.a, p.b));
    const auto model = atomize_correlations(pairs, targets, cfg_.demo_trials);
    const std::array<ChshQuadruple, 1> grid = {q};
    const auto r = check_degenerate_inequality(model, grid);
    const auto& e = r.entries.front();
    out.push_back({"degenerate-singlet-demo", kChshRelation,
                   {{"expect", "standard form exceeds 2 while the degenerate bound holds"},
                    {"trials_per_pair", cfg_.demo_trials},
                    {"quadruple", quadruple_json(q)},
                    {"degenerate_relation", kDegenerateRelation},
                    {"degenerate_value_exact", ratio_text(e.degenerate_value)},
                    {"uncertified_excess", e.uncertified_excess},
                    {"cross_terms_vanish", r.cross_terms_vanish}},
                   e.standard_value, kLocalBound,
                   e.standard_exceeds_bound && e.degenerate_holds && r.cross_terms_vanish});
  }

  void conditional_demo(std::vector<Record>& out) const {
    const auto q = ChshQuadruple::canonical();
    const auto v = chsh(correlation_function(Source{make_conditional_malus()}, quad_), q);
    out.push_back({"conditional-demo", kChshRelation,
                   {{"expect", "exceeds 2: the outcome of A is conditioned on the setting at B"},
                    {"model", "conditional-malus"},
                    {"quadruple", quadruple_json(q)},
                    {"quadrature_points", cfg_.quadrature_points}},
                   v.absolute_form, kLocalBound, v.absolute_form > kLocalBound + kChainTolerance});
  }

  const VerifyConfig& cfg_;
  std::uint64_t seed_;
  QuadratureOptions quad_;
};

}  // namespace

const OutputFile* CommandResult::file_with_extension(std::string_view ext) const {
  for (const auto& f : files) {
    const auto dot = f.name.rfind('.');
    if (dot != std::string::npos && std::string_view(f.name).substr(dot + 1) == ext) return &f;
  }
  return nullptr;
}

CommandResult run_correlate(const json& config, const Overrides& overrides) {
  const auto cfg = parse_correlate(config, overrides);
  const Source source = build_source(cfg.model, cfg.sampling.seed);
  const bool mc = cfg.sampling.trials > 0;
  const auto rows = mc ? scan_correlation(source, cfg.deltas, cfg.sampling.trials, mc_options(cfg.sampling))
                       : scan_correlation(source, cfg.deltas, QuadratureOptions{cfg.sampling.quadrature_points});

  CsvTable csv({"delta_rad", "E", "stderr"});
  json deltas = json::array(), values = json::array(), errors = json::array();
  for (const auto& r : rows) {
    csv.add_row({r.delta, r.correlation, r.standard_error});
    deltas.push_back(r.delta);
    values.push_back(r.correlation);
    errors.push_back(optional_json(r.standard_error));
  }
  json doc = {{"command", "correlate"},
              {"model", cfg.model.name},
              {"method", mc ? "monte-carlo" : "analytic"},
              {"sampling", sampling_json(cfg.sampling)},
              {"rows", rows.size()},
              {"a_rad", 0.0},
              {"delta_rad", deltas},
              {"E", values},
              {"stderr", errors}};

  CommandResult result;
  result.files = {{"correlation.csv", csv.str()}, {"correlation.json", json_text(doc)}};
  result.summary = "correlate: " + cfg.model.name + ", " + std::to_string(rows.size()) + " rows (" +
                   (mc ? "monte-carlo" : "analytic") + "), E(a=0, b=" + fixed(rows.front().delta) +
                   ") = " + fixed(rows.front().correlation) + "\n";
  return result;
}

CommandResult run_chsh(const json& config, const Overrides& overrides) {
  const auto cfg = parse_chsh(config, overrides);
  const Source source = build_source(cfg.model, cfg.sampling.seed);
  const QuadratureOptions quad{cfg.sampling.quadrature_points};

  ChshQuadruple q;
  ChshValue value;
  std::optional<double> combined;
  std::array<std::optional<double>, 4> term_errors{};
  std::array<double, 4> terms{};
  std::string method;
  json extra = json::object();
  if (cfg.maximize) {
    const auto best = maximize_chsh(correlation_function(source, quad), cfg.grid_step);
    q = best.best;
    value = best.value;
    method = "grid-maximize";
    extra = {{"grid_step_rad", cfg.grid_step}, {"quadruples_searched", best.quadruples}};
  } else {
    q = *cfg.quadruple;
    if (cfg.sampling.trials > 0) {
      const auto est = chsh_monte_carlo(source, q, cfg.sampling.trials, mc_options(cfg.sampling));
      value = est.value;
      combined = est.combined_stderr;
      for (std::size_t i = 0; i < 4; ++i) {
        terms[i] = est.terms[i].mean;
        term_errors[i] = est.terms[i].standard_error;
      }
      method = "monte-carlo";
    } else {
      value = chsh(correlation_function(source, quad), q);
      method = "analytic";
    }
  }
  if (method != "monte-carlo") {
    const auto e = correlation_function(source, quad);
    terms = {e(q.a, q.b), e(q.a, q.b_prime), e(q.a_prime, q.b), e(q.a_prime, q.b_prime)};
  }

  const char* names[4] = {"ab", "ab_prime", "a_prime_b", "a_prime_b_prime"};
  json term_json = json::object();
  for (std::size_t i = 0; i < 4; ++i) {
    term_json[names[i]] = {{"E", terms[i]}, {"stderr", optional_json(term_errors[i])}};
  }
  json doc = {{"command", "chsh"},
              {"model", cfg.model.name},
              {"method", method},
              {"quadruple", quadruple_json(q)},
              {"paperForm", value.absolute_form},
              {"signedS", value.signed_s},
              {"combined_stderr", optional_json(combined)},
              {"terms", term_json},
              {"bound", kLocalBound},
              {"exceeds_bound", value.absolute_form > kLocalBound + kChainTolerance},
              {"sampling", sampling_json(cfg.sampling)}};
  doc.update(extra);

  CsvTable csv({"method", "a", "a_prime", "b", "b_prime", "absolute_form", "signed_s", "combined_stderr"});
  csv.add_text_row({method, format_number(q.a.value()), format_number(q.a_prime.value()), format_number(q.b.value()),
                    format_number(q.b_prime.value()), format_number(value.absolute_form), format_number(value.signed_s),
                    combined ? format_number(*combined) : std::string()});

  CommandResult result;
  result.files = {{"chsh.json", json_text(doc)}, {"chsh.csv", csv.str()}};
  result.summary = "chsh: " + cfg.model.name + " (" + method + ") |P(a,b) - P(a,b')| + |P(a',b') + P(a',b)| = " +
                   fixed(value.absolute_form, 9) + (combined ? " +- " + fixed(*combined, 3) : std::string()) +
                   ", local bound 2\n";
  return result;
}

CommandResult run_verify(const json& config, const Overrides& overrides) {
  const auto cfg = parse_verify(config, overrides);
  VerifySuite suite(cfg);
  std::vector<Record> records;
  for (const auto& name : cfg.checks) suite.run(name, records);

  json doc = json::array();
  CsvTable csv({"check", "value", "bound", "pass"});
  CommandResult result;
  bool all = true;
  for (const auto& r : records) {
    doc.push_back(record_json(r));
    csv.add_text_row({r.check, format_number(r.value), format_number(r.bound), r.pass ? "true" : "false"});
    all = all && r.pass;
    result.summary += (r.pass ? "PASS " : "FAIL ") + r.check + ": " + r.relation + " (value " + fixed(r.value, 9) + ")\n";
  }
  result.files = {{"verify.json", json_text(doc)}, {"verify.csv", csv.str()}};
  result.exit_code = all ? kExitOk : kExitCheckFailed;
  return result;
}

CommandResult run_oscillator(const json& config, const Overrides& overrides) {
  const auto cfg = parse_oscillator(config, overrides);
  const auto& p = cfg.params;
  const auto w = normal_frequencies(p);
  const double dt = cfg.dt.value_or(0.01 / w.max());
  const auto traj = integrate_classical(p, cfg.initial, dt, cfg.steps, cfg.sample_every);

  CsvTable csv({"t", "q1", "q2", "p1", "p2", "E1", "E2", "Etotal"});
  for (const auto& pt : traj.points) {
    csv.add_row({pt.t, pt.state.q(0), pt.state.q(1), pt.state.p(0), pt.state.p(1), pt.e1, pt.e2, pt.total});
  }

  const auto measured = exchange_period(traj);
  const auto expected = expected_exchange_period(p);
  std::optional<double> rel_error;
  if (measured && expected) rel_error = std::abs(*measured - *expected) / *expected;
  const bool drift_ok = traj.relative_drift <= cfg.drift_tolerance;

  json levels = json::array();
  for (const auto& l : lowest_levels(p, cfg.levels)) levels.push_back({{"n1", l.n1}, {"n2", l.n2}, {"energy", l.energy}});
  json doc = {
      {"command", "oscillator"},
      {"params", {{"mass", p.mass}, {"omega", p.omega}, {"kappa", p.kappa}, {"h", p.h}}},
      {"initial",
       {{"q1", cfg.initial.q(0)}, {"q2", cfg.initial.q(1)}, {"p1", cfg.initial.p(0)}, {"p2", cfg.initial.p(1)}}},
      {"dt", dt},
      {"steps", cfg.steps},
      {"sample_every", cfg.sample_every},
      {"frequencies", {{"in_phase", w.in_phase}, {"out_of_phase", w.out_of_phase}}},
      {"energy",
       {{"initial", traj.points.front().total},
        {"relative_drift", traj.relative_drift},
        {"relative_fluctuation", traj.relative_fluctuation},
        {"drift_tolerance", cfg.drift_tolerance},
        {"drift_pass", drift_ok}}},
      {"beat_period",
       {{"measured", optional_json(measured)},
        {"expected", optional_json(expected)},
        {"relative_error", optional_json(rel_error)}}},
      {"levels", levels}};

  CommandResult result;
  result.files = {{"trajectory.csv", csv.str()}, {"oscillator.json", json_text(doc)}};
  result.exit_code = drift_ok ? kExitOk : kExitCheckFailed;
  result.summary = "oscillator: normal frequencies " + fixed(w.in_phase, 9) + ", " + fixed(w.out_of_phase, 9) +
                   "; energy drift " + fixed(traj.relative_drift, 3) + " (tolerance " +
                   fixed(cfg.drift_tolerance, 3) + ")" +
                   (measured ? "; beat period " + fixed(*measured, 6) : std::string()) +
                   (expected ? " vs 2 pi / (w1' - w2') = " + fixed(*expected, 6) : std::string()) + "\n";
  return result;
}

CommandResult run_command(std::string_view command, const json& config, const Overrides& overrides) {
  static const std::vector<std::pair<std::string_view, std::function<CommandResult(const json&, const Overrides&)>>>
      table = {{"correlate", run_correlate}, {"chsh", run_chsh}, {"verify", run_verify}, {"oscillator", run_oscillator}};
  auto fail = [](const std::string& msg) {
    CommandResult r;
    r.exit_code = kExitConfigError;
    r.diagnostics = msg;
    return r;
  };
  for (const auto& [name, fn] : table) {
    if (name != command) continue;
    try {
      return fn(config, overrides);
    } catch (const ConfigError& e) {
      return fail(std::string("config error: ") + e.what());
    } catch (const InvalidModelError& e) {
      return fail(std::string("invalid model: ") + e.what());
    } catch (const std::logic_error& e) {
      // invalid_argument, out_of_range, domain_error: inputs the library rejected
      return fail(std::string("invalid input: ") + e.what());
    }
  }
  return fail("unknown command \"" + std::string(command) + "\"");
}

}  // namespace bellab::app
