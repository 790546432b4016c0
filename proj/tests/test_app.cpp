#include "doctest.h"
#include "oracles.hpp"

#include <set>

#include "bellab/app/commands.hpp"
#include "bellab/app/format.hpp"

using namespace bellab::app;
using nlohmann::json;

namespace {

json parse_output(const CommandResult& r, std::string_view ext = "json") {
  const auto* f = r.file_with_extension(ext);
  REQUIRE(f != nullptr);
  return json::parse(f->content);
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\n') {
      out.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

json canonical_quadruple_deg() { return {{"a", 0}, {"a_prime", 45}, {"b", 22.5}, {"b_prime", 67.5}}; }

}  // namespace

TEST_CASE("format_number is shortest round-trip with a period separator") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-1.0) == "-1");
  CHECK(format_number(1e-300) == "1e-300");
  CHECK(format_number(1234567.0) == "1234567");
  CHECK(std::stod(format_number(oracle::pi)) == oracle::pi);
}

TEST_CASE("correlate: singlet over 0..90 degrees in 5 degree steps") {
  const json cfg = {{"model", "qm-singlet"}, {"units", "deg"}, {"delta_grid", {{"start", 0}, {"stop", 90}, {"step", 5}}}};
  const auto r = run_command("correlate", cfg, {});
  REQUIRE(r.exit_code == 0);
  const auto rows = lines(r.file_with_extension("csv")->content);
  REQUIRE(rows.size() == 20);
  CHECK(rows[0] == "delta_rad,E,stderr");
  const auto doc = parse_output(r);
  CHECK(doc["rows"] == 19);
  CHECK(std::abs(doc["E"][0].get<double>() + 1.0) <= 1e-12);
  CHECK(std::abs(doc["E"][18].get<double>() - 1.0) <= 1e-12);
  CHECK(std::abs(doc["delta_rad"][18].get<double>() - oracle::pi / 2) <= 1e-12);
}

TEST_CASE("correlate: conditional-malus gives E(0) = +1") {
  const auto r = run_command("correlate", {{"model", "conditional-malus"}}, {});
  REQUIRE(r.exit_code == 0);
  CHECK(std::abs(parse_output(r)["E"][0].get<double>() - 1.0) <= 1e-12);
}

TEST_CASE("correlate: configuration errors exit 2") {
  CHECK(run_command("correlate", {{"model", "factorized-sign"}, {"trials", 1000}}, {}).exit_code == 2);
  CHECK(run_command("correlate", {{"model", "factorized-sign"}, {"trials", 1000}}, {.seed = 3}).exit_code == 0);
  CHECK(run_command("correlate", {{"model", "nope"}}, {}).exit_code == 2);
  CHECK(run_command("correlate", {{"deltas", {0, 10}}}, {}).exit_code == 2);  // no units
  CHECK(run_command("correlate", {{"units", "grad"}, {"deltas", {0}}}, {}).exit_code == 2);
  CHECK(run_command("correlate", {{"colour", "blue"}}, {}).exit_code == 2);
  CHECK(run_command("correlate", {{"model_params", {{"offset", 1}}}, {"units", "rad"}}, {}).exit_code == 2);
  CHECK(run_command("correlate", {{"quadrature_points", 15}}, {}).exit_code == 2);
  CHECK(run_command("correlate", {{"trials", 10}, {"seed", -1}}, {}).exit_code == 2);
  CHECK(run_command("frobnicate", json::object(), {}).exit_code == 2);
}

TEST_CASE("correlate: Monte Carlo rows carry standard errors") {
  const json cfg = {{"model", "qm-singlet"}, {"units", "rad"}, {"deltas", {0.0, 0.5}}, {"trials", 20000}, {"seed", 8}};
  const auto r = run_command("correlate", cfg, {});
  REQUIRE(r.exit_code == 0);
  const auto doc = parse_output(r);
  CHECK(doc["E"][0] == -1.0);
  CHECK(doc["stderr"][0] == 0.0);
  const double se = doc["stderr"][1].get<double>();
  CHECK(std::abs(doc["E"][1].get<double>() - oracle::singlet_e(0, 0.5)) <= 4 * se);
}

TEST_CASE("correlate: flag seed overrides file seed") {
  const json cfg = {{"model", "factorized-sign"}, {"units", "rad"}, {"deltas", {0.7}}, {"trials", 5000}, {"seed", 1}};
  const auto file = run_command("correlate", cfg, {});
  const auto same = run_command("correlate", cfg, {.seed = 1});
  const auto flag = run_command("correlate", cfg, {.seed = 2});
  CHECK(file.files[0].content == same.files[0].content);
  CHECK(file.files[0].content != flag.files[0].content);
}

TEST_CASE("correlate: atomized model from explicit tables") {
  const json cfg = {{"model", "atomized"},
                    {"units", "deg"},
                    {"deltas", {0, 90}},
                    {"model_params",
                     {{"atoms",
                       {{{"lambda_id", 0}, {"a", 1}, {"b", {{0, 1}, {90, -1}}}},
                        {{"lambda_id", 1}, {"a", -1}, {"b", {{0, 1}, {90, -1}}}}}}}}};
  const auto r = run_command("correlate", cfg, {});
  REQUIRE(r.exit_code == 0);
  const auto doc = parse_output(r);
  CHECK(doc["E"][0] == 0.0);
  CHECK(doc["E"][1] == 0.0);

  json dup = cfg;
  dup["model_params"]["atoms"][1]["lambda_id"] = 0;
  CHECK(run_command("correlate", dup, {}).exit_code == 2);
  json missing = cfg;
  missing["deltas"] = {0, 45};
  CHECK(run_command("correlate", missing, {}).exit_code == 2);
}

TEST_CASE("chsh: singlet at the canonical quadruple") {
  const json cfg = {{"model", "qm-singlet"}, {"units", "deg"}, {"quadruple", canonical_quadruple_deg()}};
  const auto r = run_command("chsh", cfg, {});
  REQUIRE(r.exit_code == 0);
  const auto doc = parse_output(r);
  CHECK(std::abs(doc["paperForm"].get<double>() - oracle::kTwoSqrtTwo) <= 1e-9);
  CHECK(doc["method"] == "analytic");
  CHECK(doc["exceeds_bound"] == true);
}

TEST_CASE("chsh: factorized-sign maximized on the pi/8 grid") {
  const json cfg = {{"model", "factorized-sign"}, {"maximize", true}, {"units", "deg"}, {"grid_step", 22.5}};
  const auto r = run_command("chsh", cfg, {});
  REQUIRE(r.exit_code == 0);
  const auto doc = parse_output(r);
  CHECK(std::abs(doc["paperForm"].get<double>() - 2.0) <= 1e-9);
  CHECK(doc["quadruples_searched"] == 4096);
  CHECK(doc["exceeds_bound"] == false);
}

TEST_CASE("chsh: conditional-malus by Monte Carlo") {
  const json cfg = {{"model", "conditional-malus"}, {"units", "deg"}, {"quadruple", canonical_quadruple_deg()},
                    {"trials", 1000000}, {"seed", 2024}, {"partitions", 4}};
  const auto r = run_command("chsh", cfg, {});
  REQUIRE(r.exit_code == 0);
  const auto doc = parse_output(r);
  CHECK(std::abs(doc["paperForm"].get<double>() - oracle::kTwoSqrtTwo) <= 3 * doc["combined_stderr"].get<double>());
}

TEST_CASE("chsh: configuration errors") {
  CHECK(run_command("chsh", {{"model", "qm-singlet"}}, {}).exit_code == 2);
  CHECK(run_command("chsh", {{"maximize", true}, {"units", "rad"}, {"grid_step", 0.3}}, {}).exit_code == 2);
  CHECK(run_command("chsh", {{"maximize", true}, {"trials", 10}, {"seed", 1}}, {}).exit_code == 2);
  CHECK(run_command("chsh", {{"units", "deg"}, {"quadruple", {{"a", 0}, {"b", 1}}}}, {}).exit_code == 2);
}

TEST_CASE("verify: default suite passes") {
  const auto r = run_command("verify", json::object(), {.seed = 1});
  CHECK(r.exit_code == 0);
  const auto doc = parse_output(r);
  REQUIRE(doc.is_array());
  std::set<std::string> seen;
  for (const auto& rec : doc) {
    CHECK(rec["pass"] == true);
    for (const char* key : {"check", "paper_eq", "inputs", "value", "bound", "pass"}) CHECK(rec.contains(key));
    seen.insert(rec["check"].get<std::string>());
  }
  CHECK(seen.size() == verify_check_names().size());
}

TEST_CASE("verify: cross terms for five atoms") {
  const auto r = run_command("verify", {{"checks", {"cross-terms"}}, {"atomized_sizes", {5}}}, {.seed = 9});
  REQUIRE(r.exit_code == 0);
  const auto doc = parse_output(r);
  REQUIRE(doc.size() == 1);
  CHECK(doc[0]["inputs"]["cross_pairs"] == 20);
  CHECK(doc[0]["inputs"]["nonzero_cross_pairs"] == 0);
  CHECK(doc[0]["value"] == 0.0);
}

TEST_CASE("verify: configuration errors") {
  CHECK(run_command("verify", {{"checks", {"bogus"}}}, {.seed = 1}).exit_code == 2);
  CHECK(run_command("verify", json::object(), {}).exit_code == 2);
  CHECK(run_command("verify", {{"grid_step", 22.5}}, {.seed = 1}).exit_code == 2);
}

TEST_CASE("oscillator: beat period and levels") {
  const json cfg = {{"omega", 1.0}, {"kappa", 0.1}, {"initial", {{"q1", 1.0}}}, {"steps", 100000}};
  const auto r = run_command("oscillator", cfg, {});
  REQUIRE(r.exit_code == 0);
  const auto doc = parse_output(r);
  CHECK(doc["beat_period"]["relative_error"].get<double>() <= 0.01);
  CHECK(std::abs(doc["beat_period"]["expected"].get<double>() - oracle::kBeatPeriodKappaTenth) <= 1e-9);
  CHECK(doc["energy"]["relative_drift"].get<double>() <= 1e-6);
  CHECK(lines(r.file_with_extension("csv")->content)[0] == "t,q1,q2,p1,p2,E1,E2,Etotal");

  const auto levels =
      parse_output(run_command("oscillator", {{"kappa", 0.0}, {"h", 2 * oracle::pi}, {"levels", 3}, {"steps", 10}}, {}))["levels"];
  REQUIRE(levels.size() == 3);
  const double expected[3] = {1, 2, 2};
  const int n1[3] = {0, 1, 0}, n2[3] = {0, 0, 1};
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(levels[i]["energy"].get<double>() - expected[i]) <= 1e-12);
    CHECK(levels[i]["n1"] == n1[i]);
    CHECK(levels[i]["n2"] == n2[i]);
  }
}

TEST_CASE("oscillator: exit codes") {
  CHECK(run_command("oscillator", {{"omega", 1.0}, {"kappa", 1.5}}, {}).exit_code == 2);
  CHECK(run_command("oscillator", {{"dt", 0.5}}, {}).exit_code == 2);
  CHECK(run_command("oscillator", {{"drift_tolerance", 1e-20}, {"steps", 1000}}, {}).exit_code == 1);
}

TEST_CASE("determinism: identical config and seed give byte-identical files") {
  const json cfg = {{"model", "qm-singlet"}, {"units", "deg"}, {"quadruple", canonical_quadruple_deg()},
                    {"trials", 50000}, {"seed", 11}, {"partitions", 3}};
  json threaded = cfg;
  threaded["workers"] = 3;
  const auto one = run_command("chsh", cfg, {});
  const auto two = run_command("chsh", threaded, {});
  REQUIRE(one.files.size() == two.files.size());
  for (std::size_t i = 0; i < one.files.size(); ++i) CHECK(one.files[i].content == two.files[i].content);

  const auto v1 = run_command("verify", json::object(), {.seed = 4});
  const auto v2 = run_command("verify", json::object(), {.seed = 4});
  CHECK(v1.files[0].content == v2.files[0].content);
}
