// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exits nonzero when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qtc/bell.hpp"
#include "qtc/bundle.hpp"
#include "qtc/histories.hpp"
#include "qtc/linalg.hpp"
#include "qtc/mixtures.hpp"
#include "qtc/scenarios.hpp"
#include "qtc/twotime.hpp"

namespace {

using namespace qtc;

constexpr double kPi = std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);

struct Criterion {
  std::string name;
  std::function<bool(std::string&)> run;
};

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

Matrix zp() { return projector(ket_z_plus()); }
Matrix zm() { return projector(ket_z_minus()); }
Matrix xp() { return projector(ket_x_plus()); }
Matrix xm() { return projector(ket_x_minus()); }

bool criterion_tsirelson_saturation(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  const OptimizeResult r = optimize_chsh_settings(identity(2) / 2.0, 20000, 42);
  const double elapsed = seconds_since(start);
  detail = "value=" + fmt(r.value) + " elapsed=" + fmt(elapsed) + "s";
  return std::abs(r.value - 2.0 * kSqrt2) <= 1e-6 && elapsed < 5.0;
}

bool criterion_printed_settings(std::string& detail) {
  const BellResult printed = chsh_temporal(identity(2) / 2.0, printed_chsh_settings());
  ScenarioConfig config;
  config.scenario = "tsirelson";
  const ScenarioResult scenario = run_scenario(config);
  const bool labeled = scenario.document.at("results").contains("printed") &&
                       scenario.document.at("results").contains("canonical") &&
                       scenario.document.at("results").contains("note");
  detail = "printed=" + fmt(printed.value);
  return std::abs(printed.value - (1.0 + kSqrt2)) <= 1e-9 && labeled;
}

bool criterion_luders_bounds(std::string& detail) {
  const Matrix rho = identity(2) / 2.0;
  double max_dev = 0.0;
  for (int n = 3; n <= 6; ++n) {
    std::vector<BlochDirection> dirs;
    for (int i = 0; i < n; ++i) dirs.push_back(BlochDirection::from_planar_angle(i * kPi / n));
    const LgiResult r = lgi_n(rho, dirs);
    max_dev = std::max(max_dev, std::abs(r.value - luders_bound(n)));
  }
  double worst_excess = -1e9;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (int n = 3; n <= 6; ++n) {
      const OptimizeResult r = optimize_lgi_settings(n, rho, 1500, seed);
      worst_excess = std::max(worst_excess, r.value - luders_bound(n));
    }
  }
  detail = "max_dev=" + fmt(max_dev) + " worst_excess=" + fmt(worst_excess);
  return max_dev <= 1e-9 && worst_excess <= 1e-6;
}

bool criterion_classical_bounds(std::string& detail) {
  for (int n = 3; n <= 12; ++n) {
    const auto [lo, hi] = classical_lgi_bounds(n);
    const double expected_lo = (n % 2 == 1) ? -n : -(n - 2);
    if (lo != expected_lo || hi != static_cast<double>(n - 2)) {
      detail = "mismatch at n=" + std::to_string(n);
      return false;
    }
  }
  detail = "n=3..12 exact";
  return true;
}

bool criterion_monogamy(std::string& detail) {
  const double sum =
      monogamy_sum(identity(2) / 2.0, canonical_chsh_settings(), canonical_chsh_settings());
  detail = "sum=" + fmt(sum);
  return std::abs(sum - 4.0 * kSqrt2) <= 1e-9 && sum > 4.0;
}

bool criterion_chain_bound(std::string& detail) {
  double max_dev = 0.0;
  for (int n = 2; n <= 6; ++n) {
    const std::vector<SettingsPair> pairs(static_cast<std::size_t>(n),
                                          canonical_chsh_settings());
    const ChainBoundResult r = chain_bound_sum(n, pairs, identity(2) / 2.0);
    max_dev = std::max(max_dev, std::abs(r.sum - 2.0 * kSqrt2 * n));
    if (r.sum > 2.0 * kSqrt2 * n + 1e-9) {
      detail = "bound exceeded at n=" + std::to_string(n);
      return false;
    }
  }
  detail = "max_dev=" + fmt(max_dev);
  return max_dev <= 1e-9;
}

bool criterion_abl_weight_equivalence(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(42);
  double max_dev = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = (trial % 2 == 0) ? 2 : 3;
    const std::size_t slots = 1 + static_cast<std::size_t>(trial % 3);
    const TimeGrid grid = TimeGrid::uniform(slots + 2, dim);
    std::vector<Matrix> steps;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) steps.push_back(random_unitary(dim, rng));
    std::vector<NamedObservable> settings;
    for (std::size_t s = 0; s < slots; ++s) {
      const Matrix u = random_unitary(dim, rng);
      Matrix diag = Matrix::Zero(dim, dim);
      for (int k = 0; k < dim; ++k) diag(k, k) = dim - 1 - 2 * k;
      settings.push_back({"S" + std::to_string(s), u * diag * u.adjoint()});
    }
    const HistoryBundle bundle(grid, BridgingSet(std::move(steps)), random_state(dim, rng),
                               std::optional<Vector>(random_state(dim, rng)));
    const auto report = verify_weight_correspondence(bundle, settings);
    max_dev = std::max(max_dev, report.max_deviation);
  }
  const double elapsed = seconds_since(start);
  detail = "max_dev=" + fmt(max_dev) + " elapsed=" + fmt(elapsed) + "s";
  return max_dev <= 1e-9 && elapsed < 10.0;
}

bool criterion_example1(std::string& detail) {
  const TimeGrid grid = TimeGrid::uniform(3, 2);
  const BridgingSet bridging = BridgingSet::trivial(2, 2);
  const HistoryVector h1(grid, bridging,
                         {{kSqrt2, {zp(), xp(), zp()}}, {kSqrt2, {zp(), xm(), zm()}}});
  const HistoryVector h2(grid, bridging,
                         {{kSqrt2, {zp(), xp(), zm()}}, {kSqrt2, {zp(), xm(), zp()}}});
  const HistoryVector h3(grid, bridging,
                         {{kSqrt2, {zm(), xp(), zp()}}, {kSqrt2, {zm(), xm(), zm()}}});
  const HistoryVector h4(grid, bridging,
                         {{kSqrt2, {zm(), xp(), zm()}}, {kSqrt2, {zm(), xm(), zp()}}});
  const HistoryVector phi(grid, bridging, {{1.0, {zp(), zp(), zp()}}});
  const HistoryVector minus_chain(grid, bridging, {{1.0, {zm(), zm(), zm()}}});

  const double p_h1 = std::norm(inner_product(phi, h1));
  if (std::abs(p_h1 - 0.5) > 1e-12) {
    detail = "P_H1=" + fmt(p_h1);
    return false;
  }
  const HistoryVector superposition =
      (Complex(1.0 / kSqrt2) * h1).plus(Complex(1.0 / kSqrt2) * h2);
  if (!equivalent(superposition, phi)) {
    detail = "phi equivalence failed";
    return false;
  }
  for (const auto& [alpha, beta] :
       {std::pair<double, double>{1.0, 0.0}, std::pair<double, double>{0.0, 1.0},
        std::pair<double, double>{1.0 / kSqrt2, 1.0 / kSqrt2}}) {
    const Complex a = alpha / kSqrt2;
    const Complex b = beta / kSqrt2;
    const HistoryVector ghz = (a * h1).plus(a * h2).plus(b * h3).plus(b * h4);
    const HistoryVector target = (Complex(alpha) * phi).plus(Complex(beta) * minus_chain);
    if (!equivalent(ghz, target)) {
      detail = "tau-GHZ failed at alpha=" + fmt(alpha);
      return false;
    }
  }
  detail = "P_H1=" + fmt(p_h1) + ", identities hold";
  return true;
}

bool criterion_reduction(std::string& detail) {
  const TimeGrid grid = TimeGrid::uniform(4, 2);
  const BridgingSet bridging = BridgingSet::trivial(3, 2);
  const Complex alpha = 1.0 / kSqrt2;
  const HistoryVector entangled(
      grid, bridging,
      {{alpha, {xp(), zp(), zp(), zp()}}, {alpha, {xp(), zm(), zm(), zm()}}});
  const MixedHistory reduced = temporal_partial_trace(entangled, {"t1", "t3"});
  if (reduced.ensemble().size() != 2) {
    detail = "ensemble size " + std::to_string(reduced.ensemble().size());
    return false;
  }
  const double p0 = reduced.ensemble()[0].first;
  const double p1 = reduced.ensemble()[1].first;
  const double cross =
      std::abs(inner_product(reduced.ensemble()[0].second, reduced.ensemble()[1].second));
  detail = "p=(" + fmt(p0) + "," + fmt(p1) + ") cross=" + fmt(cross);
  return std::abs(p0 - 0.5) <= 1e-9 && std::abs(p1 - 0.5) <= 1e-9 && cross <= 1e-9;
}

bool criterion_signaling(std::string& detail) {
  const std::vector<MeasurementSlot> slots = {
      {"t1", {{"Z", pauli_z()}, {"X", pauli_x()}}},
      {"t2", {{"Z", pauli_z()}, {"X", pauli_x()}}},
  };
  const auto report =
      signaling_report(ket_z_plus(), slots, std::vector<Matrix>(2, identity(2)));
  detail = "future_dev=" + fmt(report.max_future_deviation);
  return report.past_independent && !report.future_independent &&
         std::abs(report.max_future_deviation - 0.5) <= 1e-9;
}

bool criterion_state_independence(std::string& detail) {
  Rng rng(42);
  const Matrix a = pauli_z();
  const Matrix b = (pauli_z() + pauli_x()) / kSqrt2;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double max_dot_dev = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double c = temporal_correlator(random_density(2, rng), a, b);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
    max_dot_dev = std::max(max_dot_dev, std::abs(c - 1.0 / kSqrt2));
  }
  detail = "spread=" + fmt(hi - lo) + " dot_dev=" + fmt(max_dot_dev);
  return (hi - lo) <= 1e-10 && max_dot_dev <= 1e-10;
}

bool criterion_cli_determinism(std::string& detail) {
#ifndef QTC_CLI_PATH
  detail = "CLI path not configured";
  return false;
#else
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path();
  const fs::path out1 = dir / "qtcorr_accept_run1.json";
  const fs::path out2 = dir / "qtcorr_accept_run2.json";
  const std::string base = std::string("\"") + QTC_CLI_PATH +
                           "\" run --scenario verify --seed 42 --out ";
  const int rc1 = std::system((base + out1.string()).c_str());
  const int rc2 = std::system((base + out2.string()).c_str());
  if (rc1 != 0 || rc2 != 0) {
    detail = "CLI exit codes " + std::to_string(rc1) + "/" + std::to_string(rc2);
    return false;
  }
  std::ifstream f1(out1, std::ios::binary);
  std::ifstream f2(out2, std::ios::binary);
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  fs::remove(out1);
  fs::remove(out2);
  const bool identical = !s1.str().empty() && s1.str() == s2.str();
  detail = identical ? "byte-identical (" + std::to_string(s1.str().size()) + " bytes)"
                     : "documents differ";
  return identical;
#endif
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"tsirelson-saturation", criterion_tsirelson_saturation},
      {"printed-settings-discrepancy", criterion_printed_settings},
      {"luders-bounds", criterion_luders_bounds},
      {"classical-lgi-bounds", criterion_classical_bounds},
      {"monogamy-violation", criterion_monogamy},
      {"chain-bound", criterion_chain_bound},
      {"abl-weight-equivalence", criterion_abl_weight_equivalence},
      {"example1", criterion_example1},
      {"eq13-reduction", criterion_reduction},
      {"signaling-asymmetry", criterion_signaling},
      {"state-independence", criterion_state_independence},
      {"cli-determinism", criterion_cli_determinism},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string detail;
    bool ok = false;
    try {
      ok = criteria[i].run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("%s  %2zu %s%s%s\n", ok ? "PASS" : "FAIL", i + 1, criteria[i].name.c_str(),
                detail.empty() ? "" : ": ", detail.c_str());
    if (!ok) ++failures;
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
  }
  return failures == 0 ? 0 : 1;
}
