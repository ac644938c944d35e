#ifndef QTC_BELL_HPP
#define QTC_BELL_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "qtc/linalg.hpp"
#include "qtc/twotime.hpp"

#include "json.hpp"

namespace qtc {

/// Two dichotomic observables per party for a temporal CHSH experiment;
/// Alice measures at the earlier time, Bob at the later one.
struct SettingsPair {
  BlochDirection a1, a2, b1, b2;
};

/// Canonical Tsirelson-saturating settings: A1=Z, A2=X, B1=(Z+X)/sqrt2,
/// B2=(Z-X)/sqrt2.
SettingsPair canonical_chsh_settings();

/// The settings as printed in the source discussion: A1=Z, A2=(Z+X)/sqrt2,
/// B1=Z, B2=(Z-X)/sqrt2. Under the sequential-measurement correlator these
/// evaluate to 1+sqrt2, not 2*sqrt2; both variants are reported.
SettingsPair printed_chsh_settings();

struct BellResult {
  double value = 0.0;
  double c11 = 0.0, c12 = 0.0, c21 = 0.0, c22 = 0.0;
  double bound_classical = 2.0;
  double bound_quantum = 0.0;  // 2*sqrt2
  SettingsPair settings;
};

struct LgiResult {
  int n = 0;
  double value = 0.0;
  std::vector<double> consecutive;  // c_{i,i+1}
  double closing = 0.0;             // c_{1,n}
  double classical_lower = 0.0;
  double classical_upper = 0.0;
  double luders = 0.0;
};

/// Expectation of the product of two consecutive dichotomic measurements:
/// the first collapses the state (Lueders rule), the second is measured on
/// the update. Computed by enumerating the forward measurement chains of
/// the outcome pairs; for qubits this equals Tr(rho {a,b})/2, which the
/// tests verify against this enumeration.
double temporal_correlator(const Matrix& state, const Matrix& a, const Matrix& b);

/// S = c12 + c21 + c11 - c22 from four independently evaluated two-time
/// experiments.
BellResult chsh_temporal(const Matrix& state, const SettingsPair& s);

/// K_n = sum c_{i,i+1} - c_{1,n}; every correlator comes from a separate
/// two-measurement experiment with measurements only at its two times.
LgiResult lgi_n(const Matrix& state, const std::vector<BlochDirection>& directions);

/// Classical bounds of K_n by exhaustive enumeration of all 2^n
/// deterministic +-1 assignments. 3 <= n <= 20.
std::pair<double, double> classical_lgi_bounds(int n);

/// Lueders bound n*cos(pi/n) of the n-time LGI for qubits.
double luders_bound(int n);

enum class BellFunctional { kChsh, kLgi };

struct OptimizeResult {
  BellFunctional functional = BellFunctional::kChsh;
  int n = 0;                   // LGI order; 0 for CHSH
  std::vector<double> angles;  // X-Z plane angles, one per observable
  double value = 0.0;
  double bound = 0.0;
  bool exceeds_bound = false;  // value > bound + 1e-6, reported, never thrown
  int evaluations = 0;
};

/// Derivative-free maximization over coplanar (X-Z) observable angles:
/// deterministic seeded sampling of the 2-degree angle lattice plus a
/// canonical equal-spacing start, refined by Nelder-Mead from the best
/// candidate. Deterministic for a fixed seed.
OptimizeResult optimize_chsh_settings(const Matrix& state, int budget, std::uint64_t seed);
OptimizeResult optimize_lgi_settings(int n, const Matrix& state, int budget, std::uint64_t seed);

/// S_AB + S_BC over three consecutive time slots of one system. The BC pair
/// is evaluated on the averaged post-measurement state of the A slot
/// (uniform over A's two settings).
double monogamy_sum(const Matrix& state, const SettingsPair& s_ab, const SettingsPair& s_bc);

struct ChainBoundResult {
  double sum = 0.0;
  double bound = 0.0;  // 2*sqrt2*n
  bool within_bound = false;
  std::vector<double> per_pair;
};

/// Sum of n pairwise CHSH values along a chain of time slots, each pair an
/// independent replicated experiment; the input state of pair i+1 is the
/// averaged post-measurement state after pair i's first slot.
ChainBoundResult chain_bound_sum(int n, const std::vector<SettingsPair>& per_pair_settings,
                                 const Matrix& state);

nlohmann::json to_json(const BellResult& r);
nlohmann::json to_json(const LgiResult& r);
nlohmann::json to_json(const OptimizeResult& r);

}  // namespace qtc

#endif  // QTC_BELL_HPP
