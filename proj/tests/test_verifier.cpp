#include "doctest.h"
#include "oracles.hpp"

#include <random>

#include "bellab/verifier.hpp"

using namespace bellab;

namespace {

FactorizedModel constant_model(double a, double b) {
  FactorizedModel m;
  m.distribution = UniformContinuous{};
  m.outcome_a = [a](Angle, const HiddenVariable&) { return a; };
  m.outcome_b = [b](Angle, const HiddenVariable&) { return b; };
  return m;
}

std::vector<Angle> setting_grid(int k) {
  std::vector<Angle> out;
  for (int i = 0; i < k; ++i) out.emplace_back(i * oracle::pi / k);
  return out;
}

double lambda_of(const HiddenVariable& h) { return std::get<ContinuousLambda>(h).angle; }

}  // namespace

TEST_CASE("check_bounds examples") {
  const auto settings = setting_grid(16);
  const auto nodes = lambda_nodes(UniformContinuous{}, {.points = 256});
  CHECK(nodes.size() == 256);

  const auto sign = check_bounds(make_factorized_sign(), settings, nodes);
  CHECK(sign.pass());
  CHECK(sign.points_checked == 2 * 16 * 256);

  const std::vector<Angle> one_setting = {Angle(0.0)};
  const std::vector<HiddenVariable> one_node = {ContinuousLambda{0.3}};
  const auto bad = check_bounds(constant_model(1.5, 1.0), one_setting, one_node);
  REQUIRE(bad.violations.size() == 1);
  CHECK(bad.violations[0].station == Station::a);
  CHECK(bad.violations[0].value == 1.5);

  FactorizedModel cosine = make_factorized_sign();
  cosine.outcome_a = [](Angle a, const HiddenVariable& l) { return std::cos(2 * (a.value() - lambda_of(l))); };
  CHECK(check_bounds(cosine, settings, nodes).pass());
}

TEST_CASE("check_zero_identity") {
  CHECK(check_zero_identity({1, 1}, {1, 1}) == 0.0);
  CHECK(std::abs(check_zero_identity({1, -1}, {0.5, 0.3})) <= 1e-12);

  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0;
  for (int i = 0; i < 100000; ++i) {
    worst = std::max(worst, std::abs(check_zero_identity({u(gen), u(gen)}, {u(gen), u(gen)})));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("check_step_ss examples") {
  const auto q = ChshQuadruple::canonical();
  const auto sign = make_factorized_sign();
  for (int s : {1, -1}) {
    const auto r = check_step_ss(sign, q, s);
    CHECK(r.holds);
    CHECK(r.sign == s);
  }
  const auto zero = check_step_ss(constant_model(0, 0), q, 1);
  CHECK(zero.left == 0.0);
  CHECK(zero.right == doctest::Approx(2.0));
  CHECK(zero.holds);
  CHECK_THROWS_AS(check_step_ss(sign, q, 0), std::invalid_argument);
}

TEST_CASE("check_step_ss on 200 random quadruples, both signs") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0, oracle::pi);
  const auto sign = make_factorized_sign();
  int held = 0;
  for (int i = 0; i < 200; ++i) {
    const ChshQuadruple q{Angle(u(gen)), Angle(u(gen)), Angle(u(gen)), Angle(u(gen))};
    held += (check_step_ss(sign, q, 1).holds && check_step_ss(sign, q, -1).holds) ? 1 : 0;
  }
  CHECK(held == 200);
}

TEST_CASE("check_bell_inequality examples") {
  const auto grid = chsh_grid(oracle::pi / 8);
  const auto sign = check_bell_inequality(make_factorized_sign(), grid);
  CHECK(std::abs(sign.max_value - 2.0) <= 1e-9);
  CHECK(sign.holds);
  CHECK(sign.quadruples == grid.size());

  const auto consts = check_bell_inequality(constant_model(1, -1), grid);
  CHECK(consts.max_value == 2.0);
  CHECK(consts.holds);

  CHECK(check_bell_inequality(constant_model(0, 0), grid).max_value == 0.0);
  CHECK_FALSE(check_bell_inequality(constant_model(1.5, 1.5), grid).holds);
}

TEST_CASE("check_bell_inequality agrees with chsh") {
  const auto model = make_factorized_sign(Angle(0.2));
  std::mt19937_64 gen(15);
  std::uniform_real_distribution<double> u(0, oracle::pi);
  for (int i = 0; i < 20; ++i) {
    const std::vector<ChshQuadruple> one = {{Angle(u(gen)), Angle(u(gen)), Angle(u(gen)), Angle(u(gen))}};
    const double via_verifier = check_bell_inequality(model, one).max_value;
    const double via_estimator = chsh(correlation_function(Source{model}), one[0]).absolute_form;
    CHECK(std::abs(via_verifier - via_estimator) <= 1e-9);
  }
}

TEST_CASE("cross_term_integral examples") {
  const auto q = ChshQuadruple::canonical();
  std::vector<Atom> atoms;
  for (std::int64_t i = 0; i < 4; ++i) {
    Atom atom{i, constant_table(Outcome::pass), constant_table(Outcome::pass), std::nullopt};
    if (i == 2) {
      atom.outcome_b = lookup_table({{q.b, Outcome::absorb}, {q.b_prime, Outcome::pass}});
    }
    atoms.push_back(std::move(atom));
  }
  const auto model = make_atomized(std::move(atoms));
  CHECK(cross_term_integral(model, 0, 1, q.a, q.a_prime, q.b, q.b_prime).is_zero());
  CHECK(cross_term_integral(model, 2, 2, q.a, q.a_prime, q.b, q.b_prime) == ExactRatio(-1, 4));
  CHECK(cross_term_integral(model, 2, 2, q.a, q.a_prime, q.b, q.b_prime).value() == -0.25);
  CHECK_THROWS_AS(cross_term_integral(model, 4, 0, q.a, q.a_prime, q.b, q.b_prime), std::out_of_range);

  const auto single = make_atomized({Atom{7, constant_table(Outcome::pass), constant_table(Outcome::pass), std::nullopt}});
  CHECK(cross_term_integral(single, 0, 0, q.a, q.a_prime, q.b, q.b_prime) == ExactRatio(1, 1));
}

TEST_CASE("property: cross terms vanish exactly, diagonal equals weight times product") {
  const auto q = ChshQuadruple::canonical();
  const std::vector<Angle> settings = {q.a, q.a_prime, q.b, q.b_prime};
  RandomStream rng(99);
  for (std::size_t n : {2u, 5u, 50u}) {
    const auto model = random_atomized(n, settings, rng);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const auto t = cross_term_integral(model, i, j, q.a, q.a_prime, q.b, q.b_prime);
        if (i != j) {
          CHECK(t.is_zero());
        } else {
          const auto& at = model.atom(i);
          const int prod = sign_of(at.outcome_a(q.a)) * sign_of(at.outcome_b(q.b)) * sign_of(at.outcome_a(q.a_prime)) *
                           sign_of(at.outcome_b(q.b_prime));
          CHECK(t == ExactRatio(prod, static_cast<std::int64_t>(n)));
        }
      }
  }
}

TEST_CASE("check_degenerate_inequality: single atom") {
  const auto model = make_atomized({Atom{0, constant_table(Outcome::pass), constant_table(Outcome::pass), std::nullopt}});
  const std::vector<ChshQuadruple> grid = {ChshQuadruple::canonical()};
  const auto r = check_degenerate_inequality(model, grid);
  REQUIRE(r.entries.size() == 1);
  CHECK(r.entries[0].degenerate_value == ExactRatio(2, 1));
  CHECK(r.degenerate_holds);
  CHECK(r.cross_terms_vanish);
  CHECK(r.chain_consistent);
}

TEST_CASE("check_degenerate_inequality: random atomized models on a grid") {
  const auto grid = chsh_grid(oracle::pi / 4);
  std::vector<Angle> settings = {Angle(0.0), Angle(oracle::pi / 4), Angle(oracle::pi / 2), Angle(3 * oracle::pi / 4)};
  RandomStream rng(5);
  for (std::size_t n : {2u, 5u, 50u}) {
    const auto r = check_degenerate_inequality(random_atomized(n, settings, rng), grid);
    CHECK(r.degenerate_holds);
    CHECK(r.cross_terms_vanish);
    CHECK(r.chain_consistent);
    CHECK(r.max_standard <= 2.0 + 1e-12);
    for (const auto& e : r.entries) CHECK(e.atom_pairs == 2 * n * n);
  }
}

TEST_CASE("check_degenerate_inequality: singlet-matching subsamples") {
  const auto q = ChshQuadruple::canonical();
  const std::vector<SettingPair> pairs = {{q.a, q.b}, {q.a, q.b_prime}, {q.a_prime, q.b}, {q.a_prime, q.b_prime}};
  std::vector<double> targets;
  for (const auto& p : pairs) targets.push_back(oracle::singlet_e(p.a.value(), p.b.value()));
  const std::size_t n = 1000;
  const auto model = atomize_correlations(pairs, targets, n);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(std::abs(correlation_exact(model, pairs[i].a, pairs[i].b).value() - targets[i]) <= 1.0 / std::sqrt(double(n)));
  }
  const std::vector<ChshQuadruple> grid = {q};
  const auto r = check_degenerate_inequality(model, grid);
  REQUIRE(r.entries.size() == 1);
  const auto& e = r.entries[0];
  CHECK(e.standard_value > 2.0);
  CHECK(e.standard_exceeds_bound);
  CHECK(e.uncertified_excess == doctest::Approx(e.standard_value - 2.0));
  CHECK(e.degenerate_holds);
  CHECK(r.cross_terms_vanish);
  CHECK(e.nonzero_cross_pairs == 0);
  CHECK(std::abs(e.standard_value - oracle::kTwoSqrtTwo) <= 4.0 / std::sqrt(double(n)));
}
