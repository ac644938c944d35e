#ifndef QTC_HISTORIES_HPP
#define QTC_HISTORIES_HPP

#include <string>
#include <utility>
#include <vector>

#include "qtc/linalg.hpp"

#include "json.hpp"

namespace qtc {

/// Ordered discrete time labels plus the fiber Hilbert-space dimension.
/// The position of a label in `labels` defines the time order; labels are
/// opaque identifiers and must be unique.
struct TimeGrid {
  std::vector<std::string> labels;
  int dim = 2;

  TimeGrid() = default;
  TimeGrid(std::vector<std::string> labels_, int dim_);

  /// Grid with labels "t0".."t{n-1}".
  static TimeGrid uniform(std::size_t n_times, int dim);

  std::size_t size() const { return labels.size(); }
  std::size_t index_of(const std::string& label) const;
};

bool operator==(const TimeGrid& a, const TimeGrid& b);

/// One unitary per adjacent pair of times, step(i): t_i -> t_{i+1}.
class BridgingSet {
 public:
  BridgingSet() = default;
  explicit BridgingSet(std::vector<Matrix> steps);

  static BridgingSet trivial(std::size_t n_steps, int dim);

  std::size_t size() const { return steps_.size(); }
  const Matrix& step(std::size_t i) const { return steps_.at(i); }
  const std::vector<Matrix>& steps() const { return steps_; }

  /// Composed propagator from grid index `from` to index `to`. Adjoint is
  /// taken when `to < from`; identity when equal.
  Matrix transfer(std::size_t from, std::size_t to) const;

 private:
  std::vector<Matrix> steps_;
};

bool approx_equal(const BridgingSet& a, const BridgingSet& b, double tol = kDefaultTol);

/// One operator per time of a grid: a projector chain (or, after measurement
/// injection, an arbitrary operator chain). Operators are stored in grid
/// order, earliest first.
struct ElementaryHistory {
  TimeGrid grid;
  BridgingSet bridging;
  std::vector<Matrix> ops;

  ElementaryHistory(TimeGrid grid_, BridgingSet bridging_, std::vector<Matrix> ops_);
};

/// Complex superposition of elementary histories sharing one grid and one
/// bridging set. Immutable after construction.
class HistoryVector {
 public:
  struct Term {
    Complex coeff;
    std::vector<Matrix> ops;  // earliest first
  };

  HistoryVector(TimeGrid grid, BridgingSet bridging, std::vector<Term> terms);
  explicit HistoryVector(const ElementaryHistory& elementary, Complex coeff = 1.0);

  /// Superposition of (coefficient, elementary history) pairs; all members
  /// must share the grid and the bridging set.
  static HistoryVector superpose(const std::vector<std::pair<Complex, ElementaryHistory>>& terms);

  const TimeGrid& grid() const { return grid_; }
  const BridgingSet& bridging() const { return bridging_; }
  const std::vector<Term>& terms() const { return terms_; }

  HistoryVector scaled(Complex factor) const;
  HistoryVector plus(const HistoryVector& other) const;

 private:
  TimeGrid grid_;
  BridgingSet bridging_;
  std::vector<Term> terms_;
};

HistoryVector operator+(const HistoryVector& a, const HistoryVector& b);
HistoryVector operator*(Complex c, const HistoryVector& h);

/// Chain operator K(|H)): projectors interleaved with bridging unitaries,
/// summed over terms with their coefficients.
Matrix chain_operator(const HistoryVector& h);

/// Realization weight W = Tr(K^dag K) >= 0.
double weight(const HistoryVector& h);

/// Chain inner product (h1|h2) = Tr(K(h1)^dag K(h2)). Sesquilinear;
/// (h|h) == weight(h). Requires matching grid and bridging.
Complex inner_product(const HistoryVector& h1, const HistoryVector& h2);

/// Equality modulo the kernel of the chain inner product: chain operators
/// agree up to a global phase within `tol`. Requires matching grid and
/// bridging.
bool equivalent(const HistoryVector& h1, const HistoryVector& h2, double tol = 1e-9);

/// Scales so that (H|H) = 1. Throws std::domain_error
/// ("null history: inconsistent chain") when the weight vanishes.
HistoryVector normalize(const HistoryVector& h);

/// Sequential product: `late` appended after `early` with `bridge` joining
/// the two segments. Term lists combine bilinearly. Labels are kept when
/// disjoint, otherwise the result is relabeled "t0".."t{n-1}".
HistoryVector odot(const HistoryVector& late, const HistoryVector& early, const Matrix& bridge);

struct InjectionResult {
  HistoryVector history;   // renormalized
  double normalization;    // the factor applied to restore unit weight
};

/// Conjugates the operator at each time by the given measurement operator
/// (identity where no action) and renormalizes. Throws std::domain_error
/// ("measurement annihilates history") when the result has zero weight.
InjectionResult inject_measurement(const HistoryVector& h, const std::vector<Matrix>& per_time_ops);

/// Expectation of a history observable A = sum_i a_i |H_i)(H_i| on a
/// normalized history: sum_i a_i |(H_i|h)|^2. The eigen-histories must be
/// mutually orthonormal under the chain inner product (tolerance 1e-8).
double history_expectation(const std::vector<std::pair<double, HistoryVector>>& observable_terms,
                           const HistoryVector& h);

struct ConsistencyReport {
  Matrix gram;                       // Tr(K_a^dag K_b)
  bool consistent = false;           // off-diagonals vanish within tolerance
  double max_off_diagonal = 0.0;
  double additivity_deviation = 0.0; // |W(sum c H) - sum |c|^2 W(H)|, checked when consistent
};

/// Medium consistency: Tr(K_a^dag K_b) = 0 for a != b within 1e-9. When the
/// family is consistent, also verifies weight additivity over a superposition
/// with deterministic coefficients.
ConsistencyReport consistency_check(const std::vector<HistoryVector>& family);

struct CompletenessReport {
  bool identity_chain = false;           // K(sum c_a H_a) equals the identity chain
  bool coefficients_normalized = false;  // sum |c_a|^2 == 1
  double identity_deviation = 0.0;
  double norm_deviation = 0.0;

  /// Both conditions together. The two flags are reported separately because
  /// for some families they cannot hold simultaneously.
  bool complete() const { return identity_chain && coefficients_normalized; }
};

CompletenessReport completeness_check(const std::vector<HistoryVector>& family,
                                      const std::vector<Complex>& coeffs);

nlohmann::json to_json(const HistoryVector& h);
HistoryVector history_from_json(const nlohmann::json& j);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

}  // namespace qtc

#endif  // QTC_HISTORIES_HPP
