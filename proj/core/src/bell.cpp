#include "qtc/bell.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace qtc {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);
constexpr double kGridStep = kPi / 90.0;  // 2 degrees

std::vector<std::pair<double, Vector>> pure_decomposition(const Matrix& state) {
  if (!is_hermitian(state, 1e-9)) {
    throw std::invalid_argument("temporal_correlator: state must be Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(state);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("temporal_correlator: state eigendecomposition failed");
  }
  std::vector<std::pair<double, Vector>> out;
  double total = 0.0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const double p = solver.eigenvalues()(i);
    if (p < -1e-9) {
      throw std::invalid_argument("temporal_correlator: state is not positive semidefinite");
    }
    total += p;
    if (p > 1e-14) {
      out.emplace_back(p, solver.eigenvectors().col(i));
    }
  }
  if (std::abs(total - 1.0) > 1e-8) {
    throw std::invalid_argument("temporal_correlator: state must have unit trace");
  }
  return out;
}

double correlator_from_pures(const std::vector<std::pair<double, Vector>>& pures,
                             const NamedObservable& a, const NamedObservable& b) {
  const std::vector<Matrix> stages(2, identity(static_cast<int>(pures.front().second.size())));
  double c = 0.0;
  for (const auto& [p, v] : pures) {
    const JointDistribution d = joint_distribution(v, {a, b}, stages, {});
    for (const auto& indices : d.outcome_indices()) {
      const auto values = d.outcome_values(indices);
      c += p * values[0] * values[1] * d.probability_by_index(indices);
    }
  }
  return c;
}

/// Averaged post-measurement state after projectively measuring one of the
/// pair's first-slot observables, each setting chosen half the time.
Matrix dephase_after_first_slot(const Matrix& state, const SettingsPair& s) {
  Matrix out = Matrix::Zero(state.rows(), state.cols());
  for (const auto& dir : {s.a1, s.a2}) {
    const auto projs = dichotomic_projectors(observable_from_bloch(dir));
    for (const auto& [eigenvalue, proj] : projs) {
      out += 0.5 * (proj * state * proj);
    }
  }
  return out;
}

struct Objective {
  BellFunctional functional;
  int n;
  std::vector<std::pair<double, Vector>> pures;

  double operator()(const std::vector<double>& angles) const {
    if (functional == BellFunctional::kChsh) {
      const NamedObservable a1{"A1", observable_from_bloch(BlochDirection::from_planar_angle(angles[0]))};
      const NamedObservable a2{"A2", observable_from_bloch(BlochDirection::from_planar_angle(angles[1]))};
      const NamedObservable b1{"B1", observable_from_bloch(BlochDirection::from_planar_angle(angles[2]))};
      const NamedObservable b2{"B2", observable_from_bloch(BlochDirection::from_planar_angle(angles[3]))};
      const double c11 = correlator_from_pures(pures, a1, b1);
      const double c12 = correlator_from_pures(pures, a1, b2);
      const double c21 = correlator_from_pures(pures, a2, b1);
      const double c22 = correlator_from_pures(pures, a2, b2);
      return c12 + c21 + c11 - c22;
    }
    double value = 0.0;
    std::vector<NamedObservable> obs;
    obs.reserve(angles.size());
    for (std::size_t i = 0; i < angles.size(); ++i) {
      obs.push_back({"A" + std::to_string(i + 1),
                     observable_from_bloch(BlochDirection::from_planar_angle(angles[i]))});
    }
    for (std::size_t i = 0; i + 1 < obs.size(); ++i) {
      value += correlator_from_pures(pures, obs[i], obs[i + 1]);
    }
    value -= correlator_from_pures(pures, obs.front(), obs.back());
    return value;
  }
};

struct Candidate {
  std::vector<double> angles;
  double value;
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.value != b.value) return a.value > b.value;
  return a.angles < b.angles;  // deterministic tie-break
}

/// Nelder-Mead maximization; returns the best vertex found within the
/// evaluation allowance.
Candidate nelder_mead(const Objective& f, const std::vector<double>& start, int max_evals,
                      int* evals_used) {
  const std::size_t k = start.size();
  std::vector<Candidate> simplex;
  simplex.reserve(k + 1);
  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return f(x);
  };

  simplex.push_back({start, eval(start)});
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> x = start;
    x[i] += kGridStep;
    simplex.push_back({x, eval(x)});
  }

  const auto order = [&] {
    std::sort(simplex.begin(), simplex.end(), better);
  };
  order();

  while (evals + 4 < max_evals) {
    const double spread = simplex.front().value - simplex.back().value;
    if (std::abs(spread) < 1e-13) break;

    std::vector<double> centroid(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t v = 0; v < k; ++v) centroid[i] += simplex[v].angles[i];
      centroid[i] /= static_cast<double>(k);
    }
    const Candidate& worst = simplex.back();

    auto affine = [&](double t) {
      std::vector<double> x(k);
      for (std::size_t i = 0; i < k; ++i) x[i] = centroid[i] + t * (centroid[i] - worst.angles[i]);
      return x;
    };

    const auto reflected = affine(1.0);
    const double fr = eval(reflected);
    if (fr > simplex.front().value) {
      const auto expanded = affine(2.0);
      const double fe = eval(expanded);
      simplex.back() = (fe > fr) ? Candidate{expanded, fe} : Candidate{reflected, fr};
    } else if (fr > simplex[k - 1].value) {
      simplex.back() = {reflected, fr};
    } else {
      const auto contracted = affine(-0.5);
      const double fc = eval(contracted);
      if (fc > worst.value) {
        simplex.back() = {contracted, fc};
      } else {
        for (std::size_t v = 1; v <= k; ++v) {
          for (std::size_t i = 0; i < k; ++i) {
            simplex[v].angles[i] =
                simplex.front().angles[i] + 0.5 * (simplex[v].angles[i] - simplex.front().angles[i]);
          }
          simplex[v].value = eval(simplex[v].angles);
        }
      }
    }
    order();
  }
  *evals_used += evals;
  return simplex.front();
}

OptimizeResult optimize(BellFunctional functional, int n_angles, const Matrix& state, int budget,
                        std::uint64_t seed) {
  if (budget < 1000) {
    throw std::invalid_argument("optimize_settings: budget must be at least 1000");
  }
  Objective objective{functional, n_angles, pure_decomposition(state)};

  int evals = 0;
  auto eval_candidate = [&](std::vector<double> angles) {
    ++evals;
    const double v = objective(angles);
    return Candidate{std::move(angles), v};
  };

  // Deterministic starts: the equal-spacing ansatz, all-zero, and seeded
  // samples from the 2-degree lattice.
  std::vector<Candidate> starts;
  if (functional == BellFunctional::kChsh) {
    starts.push_back(eval_candidate({0.0, kPi / 2.0, kPi / 4.0, -kPi / 4.0}));
  } else {
    std::vector<double> ansatz(static_cast<std::size_t>(n_angles));
    for (int i = 0; i < n_angles; ++i) ansatz[static_cast<std::size_t>(i)] = i * kPi / n_angles;
    starts.push_back(eval_candidate(std::move(ansatz)));
  }
  starts.push_back(eval_candidate(std::vector<double>(static_cast<std::size_t>(n_angles), 0.0)));

  std::mt19937_64 engine(seed);
  std::uniform_int_distribution<int> lattice(0, 179);
  const int sample_budget = std::max(0, budget / 2 - evals);
  for (int s = 0; s < sample_budget; ++s) {
    std::vector<double> angles(static_cast<std::size_t>(n_angles));
    for (auto& a : angles) a = lattice(engine) * kGridStep;
    starts.push_back(eval_candidate(std::move(angles)));
  }

  Candidate best = starts.front();
  for (const auto& c : starts) {
    if (better(c, best)) best = c;
  }

  const int remaining = budget - evals;
  Candidate refined = nelder_mead(objective, best.angles, remaining, &evals);
  if (better(best, refined)) refined = best;

  OptimizeResult result;
  result.functional = functional;
  result.n = (functional == BellFunctional::kLgi) ? n_angles : 0;
  result.angles = refined.angles;
  result.value = refined.value;
  result.bound = (functional == BellFunctional::kChsh) ? 2.0 * kSqrt2 : luders_bound(n_angles);
  result.exceeds_bound = refined.value > result.bound + 1e-6;
  result.evaluations = evals;
  return result;
}

}  // namespace

SettingsPair canonical_chsh_settings() {
  return SettingsPair{
      BlochDirection::from_planar_angle(0.0),
      BlochDirection::from_planar_angle(kPi / 2.0),
      BlochDirection::from_planar_angle(kPi / 4.0),
      BlochDirection::from_planar_angle(-kPi / 4.0),
  };
}

SettingsPair printed_chsh_settings() {
  return SettingsPair{
      BlochDirection::from_planar_angle(0.0),
      BlochDirection::from_planar_angle(kPi / 4.0),
      BlochDirection::from_planar_angle(0.0),
      BlochDirection::from_planar_angle(-kPi / 4.0),
  };
}

double temporal_correlator(const Matrix& state, const Matrix& a, const Matrix& b) {
  const auto pures = pure_decomposition(state);
  return correlator_from_pures(pures, {"a", a}, {"b", b});
}

BellResult chsh_temporal(const Matrix& state, const SettingsPair& s) {
  const auto pures = pure_decomposition(state);
  const NamedObservable a1{"A1", observable_from_bloch(s.a1)};
  const NamedObservable a2{"A2", observable_from_bloch(s.a2)};
  const NamedObservable b1{"B1", observable_from_bloch(s.b1)};
  const NamedObservable b2{"B2", observable_from_bloch(s.b2)};

  BellResult r;
  r.settings = s;
  r.c11 = correlator_from_pures(pures, a1, b1);
  r.c12 = correlator_from_pures(pures, a1, b2);
  r.c21 = correlator_from_pures(pures, a2, b1);
  r.c22 = correlator_from_pures(pures, a2, b2);
  r.value = r.c12 + r.c21 + r.c11 - r.c22;
  r.bound_classical = 2.0;
  r.bound_quantum = 2.0 * kSqrt2;
  return r;
}

LgiResult lgi_n(const Matrix& state, const std::vector<BlochDirection>& directions) {
  const int n = static_cast<int>(directions.size());
  if (n < 3) {
    throw std::invalid_argument("lgi_n: at least three measurement times required");
  }
  const auto pures = pure_decomposition(state);
  std::vector<NamedObservable> obs;
  obs.reserve(directions.size());
  for (std::size_t i = 0; i < directions.size(); ++i) {
    obs.push_back({"A" + std::to_string(i + 1), observable_from_bloch(directions[i])});
  }

  LgiResult r;
  r.n = n;
  for (std::size_t i = 0; i + 1 < obs.size(); ++i) {
    r.consecutive.push_back(correlator_from_pures(pures, obs[i], obs[i + 1]));
    r.value += r.consecutive.back();
  }
  r.closing = correlator_from_pures(pures, obs.front(), obs.back());
  r.value -= r.closing;
  const auto [lo, hi] = classical_lgi_bounds(n);
  r.classical_lower = lo;
  r.classical_upper = hi;
  r.luders = luders_bound(n);
  return r;
}

std::pair<double, double> classical_lgi_bounds(int n) {
  if (n < 3 || n > 20) {
    throw std::invalid_argument("classical_lgi_bounds: n must lie in [3, 20]");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    const auto sign = [&](int i) { return (mask >> i) & 1 ? -1 : 1; };
    int k = 0;
    for (int i = 0; i + 1 < n; ++i) k += sign(i) * sign(i + 1);
    k -= sign(0) * sign(n - 1);
    lo = std::min(lo, static_cast<double>(k));
    hi = std::max(hi, static_cast<double>(k));
  }
  return {lo, hi};
}

double luders_bound(int n) {
  if (n < 3) {
    throw std::invalid_argument("luders_bound: n must be at least 3");
  }
  return n * std::cos(kPi / n);
}

OptimizeResult optimize_chsh_settings(const Matrix& state, int budget, std::uint64_t seed) {
  return optimize(BellFunctional::kChsh, 4, state, budget, seed);
}

OptimizeResult optimize_lgi_settings(int n, const Matrix& state, int budget, std::uint64_t seed) {
  if (n < 3) {
    throw std::invalid_argument("optimize_lgi_settings: n must be at least 3");
  }
  return optimize(BellFunctional::kLgi, n, state, budget, seed);
}

double monogamy_sum(const Matrix& state, const SettingsPair& s_ab, const SettingsPair& s_bc) {
  const BellResult ab = chsh_temporal(state, s_ab);
  const Matrix after_a = dephase_after_first_slot(state, s_ab);
  const BellResult bc = chsh_temporal(after_a, s_bc);
  return ab.value + bc.value;
}

ChainBoundResult chain_bound_sum(int n, const std::vector<SettingsPair>& per_pair_settings,
                                 const Matrix& state) {
  if (n < 2) {
    throw std::invalid_argument("chain_bound_sum: n must be at least 2");
  }
  if (per_pair_settings.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("chain_bound_sum: one settings pair per chain link required");
  }
  ChainBoundResult r;
  Matrix current = state;
  for (int i = 0; i < n; ++i) {
    const auto& s = per_pair_settings[static_cast<std::size_t>(i)];
    r.per_pair.push_back(chsh_temporal(current, s).value);
    r.sum += r.per_pair.back();
    current = dephase_after_first_slot(current, s);
  }
  r.bound = 2.0 * kSqrt2 * n;
  r.within_bound = r.sum <= r.bound + 1e-9;
  return r;
}

namespace {

nlohmann::json settings_to_json(const SettingsPair& s) {
  return {{"a1", s.a1.planar_angle()},
          {"a2", s.a2.planar_angle()},
          {"b1", s.b1.planar_angle()},
          {"b2", s.b2.planar_angle()}};
}

}  // namespace

nlohmann::json to_json(const BellResult& r) {
  return {{"functional", "chsh"},
          {"settings_angles", settings_to_json(r.settings)},
          {"correlators", {{"c11", r.c11}, {"c12", r.c12}, {"c21", r.c21}, {"c22", r.c22}}},
          {"value", r.value},
          {"bound_classical", r.bound_classical},
          {"bound_quantum", r.bound_quantum}};
}

nlohmann::json to_json(const LgiResult& r) {
  return {{"functional", "lgi"},
          {"n", r.n},
          {"consecutive", r.consecutive},
          {"closing", r.closing},
          {"value", r.value},
          {"classical_lower", r.classical_lower},
          {"classical_upper", r.classical_upper},
          {"luders", r.luders}};
}

nlohmann::json to_json(const OptimizeResult& r) {
  return {{"functional", r.functional == BellFunctional::kChsh ? "chsh" : "lgi"},
          {"n", r.n},
          {"angles", r.angles},
          {"value", r.value},
          {"bound", r.bound},
          {"exceeds_bound", r.exceeds_bound},
          {"evaluations", r.evaluations}};
}

}  // namespace qtc
