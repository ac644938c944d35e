#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "qtc/scenarios.hpp"

namespace {

constexpr int kExitChecksFailed = 2;
constexpr int kExitUsage = 64;
constexpr int kExitIo = 74;

int run_command(const qtc::ScenarioConfig& config) {
  qtc::ScenarioResult result;
  try {
    result = qtc::run_scenario(config);
  } catch (const qtc::UnknownScenarioError& e) {
    std::cerr << "qtcorr: " << e.what() << "\nregistered scenarios:";
    for (const auto& name : qtc::scenario_names()) std::cerr << ' ' << name;
    std::cerr << '\n';
    return kExitUsage;
  }

  const std::string payload =
      (config.format == "csv") ? result.csv : result.document.dump(2) + "\n";
  if (config.out.empty()) {
    std::cout << payload;
  } else {
    std::ofstream file(config.out, std::ios::binary);
    if (!file) {
      std::cerr << "qtcorr: cannot open output file '" << config.out << "'\n";
      return kExitIo;
    }
    file << payload;
    if (!file) {
      std::cerr << "qtcorr: write failed for '" << config.out << "'\n";
      return kExitIo;
    }
  }
  return result.all_passed ? 0 : kExitChecksFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"temporal quantum correlation scenarios"};
  app.require_subcommand(1);

  qtc::ScenarioConfig config;
  int n_value = -1;

  CLI::App* run = app.add_subcommand("run", "run a registered scenario");
  run->add_option("--scenario", config.scenario, "scenario name")->required();
  run->add_option("--n", n_value, "order parameter for luders/chain-bound");
  run->add_option("--trials", config.trials, "trial count for randomized scenarios");
  run->add_option("--seed", config.seed, "random seed");
  run->add_option("--tolerance", config.tolerance, "check tolerance");
  run->add_option("--format", config.format, "output format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  run->add_option("--out", config.out, "output path (default: stdout)");
  run->set_config("--config", "", "key=value config file, overridden by flags");

  CLI::App* list = app.add_subcommand("list", "list registered scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (list->parsed()) {
    for (const auto& name : qtc::scenario_names()) std::cout << name << '\n';
    return 0;
  }

  if (n_value > 0) config.n = n_value;
  try {
    return run_command(config);
  } catch (const std::exception& e) {
    std::cerr << "qtcorr: " << e.what() << '\n';
    return 1;
  }
}
