#include "doctest.h"

#include <cmath>
#include <sstream>

#include "qtc/scenarios.hpp"

using namespace qtc;

namespace {

ScenarioConfig config_for(const std::string& name) {
  ScenarioConfig c;
  c.scenario = name;
  return c;
}

double check_value(const nlohmann::json& doc, const std::string& name) {
  for (const auto& check : doc.at("checks")) {
    if (check.at("name") == name) return check.at("value").get<double>();
  }
  FAIL("check not found: " << name);
  return 0.0;
}

}  // namespace

TEST_CASE("unknown scenarios are rejected with the dedicated error") {
  CHECK_THROWS_AS(run_scenario(config_for("nope")), UnknownScenarioError);
}

TEST_CASE("the registry lists every scenario") {
  const auto& names = scenario_names();
  for (const char* expected :
       {"example1", "reduction", "abl-demo", "tsirelson", "luders", "monogamy", "chain-bound",
        "bundle-export", "verify"}) {
    CHECK(std::find(names.begin(), names.end(), expected) != names.end());
  }
}

TEST_CASE("trials must be positive") {
  ScenarioConfig c = config_for("verify");
  c.trials = 0;
  CHECK_THROWS_AS(run_scenario(c), std::invalid_argument);
}

TEST_CASE("every report shares the same top-level shape") {
  for (const auto& name : scenario_names()) {
    ScenarioConfig c = config_for(name);
    c.trials = 6;  // keep randomized scenarios quick
    const ScenarioResult r = run_scenario(c);
    CHECK(r.document.at("scenario") == name);
    CHECK(r.document.at("seed").get<std::uint64_t>() == 42);
    CHECK(r.document.contains("results"));
    CHECK(r.document.at("checks").is_array());
    CHECK(r.document.at("all_passed").is_boolean());
    CHECK(r.all_passed);
    CHECK(!r.csv.empty());
  }
}

TEST_CASE("example1 reports the half probability and the equivalences") {
  const ScenarioResult r = run_scenario(config_for("example1"));
  CHECK(r.all_passed);
  CHECK(check_value(r.document, "P_H1") == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(check_value(r.document, "phi_equivalence") == 1.0);
  CHECK(check_value(r.document, "tau_ghz_identity_3") == 1.0);
  // The two completeness conditions are reported separately, not both true.
  const auto& completeness = r.document.at("results").at("completeness");
  CHECK(completeness.at("coefficients_normalized").get<bool>());
  CHECK_FALSE(completeness.at("identity_chain").get<bool>());
}

TEST_CASE("tsirelson reports both settings variants") {
  const ScenarioResult r = run_scenario(config_for("tsirelson"));
  CHECK(r.all_passed);
  CHECK(r.document.at("results").at("canonical").at("value").get<double>() ==
        doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(r.document.at("results").at("printed").at("value").get<double>() ==
        doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-12));
  CHECK(r.document.at("results").contains("note"));
}

TEST_CASE("luders emits one CSV row per order") {
  const ScenarioResult all = run_scenario(config_for("luders"));
  std::size_t lines = 0;
  std::stringstream stream(all.csv);
  for (std::string line; std::getline(stream, line);) ++lines;
  CHECK(lines == 7);  // header + n = 3..8
  CHECK(all.csv.rfind("n,K_n,bound,classical_lower,classical_upper\n", 0) == 0);

  ScenarioConfig single = config_for("luders");
  single.n = 5;
  const ScenarioResult r5 = run_scenario(single);
  CHECK(r5.document.at("results").at("rows").size() == 1);
  CHECK(check_value(r5.document, "K5") == doctest::Approx(4.045084971874737).epsilon(1e-9));
}

TEST_CASE("monogamy reports the violation margin") {
  const ScenarioResult r = run_scenario(config_for("monogamy"));
  CHECK(r.all_passed);
  CHECK(check_value(r.document, "optimal_optimal") ==
        doctest::Approx(4.0 * std::sqrt(2.0)).epsilon(1e-9));
  CHECK(r.document.at("results").at("spatial_bound").get<double>() == 4.0);
}

TEST_CASE("chain-bound covers n = 2..6 by default") {
  const ScenarioResult r = run_scenario(config_for("chain-bound"));
  CHECK(r.all_passed);
  CHECK(r.document.at("results").at("rows").size() == 5);
}

TEST_CASE("bundle-export embeds the DOT document") {
  const ScenarioResult r = run_scenario(config_for("bundle-export"));
  CHECK(r.all_passed);
  const std::string dot = r.document.at("results").at("dot").get<std::string>();
  CHECK(dot.rfind("digraph history_bundle {", 0) == 0);
  CHECK(r.csv.rfind("outcome,weight,inconsistent\n", 0) == 0);
}

TEST_CASE("reduction reports an even two-member ensemble") {
  const ScenarioResult r = run_scenario(config_for("reduction"));
  CHECK(r.all_passed);
  CHECK(check_value(r.document, "ensemble_size") == 2.0);
  CHECK(check_value(r.document, "probability_1") == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(check_value(r.document, "cross_coherence") == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("verify passes with a reduced trial count") {
  ScenarioConfig c = config_for("verify");
  c.trials = 12;
  const ScenarioResult r = run_scenario(c);
  CHECK(r.all_passed);
  CHECK(check_value(r.document, "max_future_deviation") == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("identical configs produce identical documents") {
  ScenarioConfig c = config_for("verify");
  c.trials = 10;
  const std::string a = run_scenario(c).document.dump(2);
  const std::string b = run_scenario(c).document.dump(2);
  CHECK(a == b);
}

TEST_CASE("seeds flow into the randomized scenarios") {
  ScenarioConfig a = config_for("verify");
  a.trials = 10;
  ScenarioConfig b = a;
  b.seed = 43;
  const auto da = run_scenario(a).document;
  const auto db = run_scenario(b).document;
  CHECK(da.at("seed") != db.at("seed"));
  // Different random draws, same verdict.
  CHECK(db.at("all_passed").get<bool>());
}
