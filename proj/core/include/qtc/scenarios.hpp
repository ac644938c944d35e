#ifndef QTC_SCENARIOS_HPP
#define QTC_SCENARIOS_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace qtc {

struct ScenarioConfig {
  std::string scenario;
  std::optional<int> n;
  int trials = 100;
  std::uint64_t seed = 42;
  double tolerance = 1e-9;
  std::string format = "json";  // json | csv
  std::string out;              // empty: stdout
};

struct ScenarioResult {
  nlohmann::json document;  // {scenario, seed, parameters, results, checks, all_passed}
  std::string csv;
  bool all_passed = false;
};

class UnknownScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

const std::vector<std::string>& scenario_names();

/// Runs one registered scenario. Deterministic: identical configs produce
/// identical documents. Throws UnknownScenarioError for unregistered names
/// and std::invalid_argument for bad parameters.
ScenarioResult run_scenario(const ScenarioConfig& config);

}  // namespace qtc

#endif  // QTC_SCENARIOS_HPP
