#include "qtc/histories.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace qtc {

namespace {

void check_same_frame(const HistoryVector& a, const HistoryVector& b) {
  if (!(a.grid() == b.grid())) {
    throw std::invalid_argument("histories: mismatched time grids");
  }
  if (!approx_equal(a.bridging(), b.bridging())) {
    throw std::invalid_argument("histories: mismatched bridging sets");
  }
}

// Tr(k1^dag k2) as an entrywise sum, shared by weight and inner_product so
// (h|h) and weight(h) are the same computation.
Complex chain_dot(const Matrix& k1, const Matrix& k2) {
  return k1.conjugate().cwiseProduct(k2).sum();
}

}  // namespace

TimeGrid::TimeGrid(std::vector<std::string> labels_, int dim_)
    : labels(std::move(labels_)), dim(dim_) {
  if (labels.empty()) {
    throw std::invalid_argument("TimeGrid: needs at least one time label");
  }
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("TimeGrid: fiber dimension out of range");
  }
  std::set<std::string> seen(labels.begin(), labels.end());
  if (seen.size() != labels.size()) {
    throw std::invalid_argument("TimeGrid: duplicate time labels");
  }
}

TimeGrid TimeGrid::uniform(std::size_t n_times, int dim) {
  std::vector<std::string> labels;
  labels.reserve(n_times);
  for (std::size_t i = 0; i < n_times; ++i) {
    labels.push_back("t" + std::to_string(i));
  }
  return TimeGrid(std::move(labels), dim);
}

std::size_t TimeGrid::index_of(const std::string& label) const {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) {
    throw std::invalid_argument("TimeGrid: unknown time label '" + label + "'");
  }
  return static_cast<std::size_t>(it - labels.begin());
}

bool operator==(const TimeGrid& a, const TimeGrid& b) {
  return a.dim == b.dim && a.labels == b.labels;
}

BridgingSet::BridgingSet(std::vector<Matrix> steps) : steps_(std::move(steps)) {
  for (const auto& u : steps_) {
    if (!is_unitary(u)) {
      throw std::invalid_argument("BridgingSet: non-unitary bridging operator");
    }
  }
}

BridgingSet BridgingSet::trivial(std::size_t n_steps, int dim) {
  return BridgingSet(std::vector<Matrix>(n_steps, identity(dim)));
}

Matrix BridgingSet::transfer(std::size_t from, std::size_t to) const {
  if (from == to) {
    const int dim = steps_.empty() ? 0 : static_cast<int>(steps_.front().rows());
    return dim > 0 ? identity(dim) : Matrix();
  }
  if (to > from) {
    Matrix acc = steps_.at(from);
    for (std::size_t i = from + 1; i < to; ++i) {
      acc = steps_.at(i) * acc;
    }
    return acc;
  }
  return transfer(to, from).adjoint();
}

bool approx_equal(const BridgingSet& a, const BridgingSet& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!approx_equal(a.step(i), b.step(i), tol)) return false;
  }
  return true;
}

ElementaryHistory::ElementaryHistory(TimeGrid grid_, BridgingSet bridging_,
                                     std::vector<Matrix> ops_)
    : grid(std::move(grid_)), bridging(std::move(bridging_)), ops(std::move(ops_)) {
  if (ops.size() != grid.size()) {
    throw std::invalid_argument("ElementaryHistory: one operator per time label required");
  }
  if (bridging.size() + 1 != grid.size()) {
    throw std::invalid_argument("ElementaryHistory: one bridging unitary per adjacent pair required");
  }
  for (const auto& op : ops) {
    if (op.rows() != grid.dim || op.cols() != grid.dim) {
      throw std::invalid_argument("ElementaryHistory: operator dimension mismatch");
    }
    if (!all_finite(op)) {
      throw std::invalid_argument("ElementaryHistory: non-finite operator entries");
    }
  }
}

HistoryVector::HistoryVector(TimeGrid grid, BridgingSet bridging, std::vector<Term> terms)
    : grid_(std::move(grid)), bridging_(std::move(bridging)), terms_(std::move(terms)) {
  if (terms_.empty()) {
    throw std::invalid_argument("HistoryVector: empty term list");
  }
  if (bridging_.size() + 1 != grid_.size()) {
    throw std::invalid_argument("HistoryVector: bridging/grid size mismatch");
  }
  for (const auto& term : terms_) {
    if (term.ops.size() != grid_.size()) {
      throw std::invalid_argument("HistoryVector: term length does not match grid");
    }
    for (const auto& op : term.ops) {
      if (op.rows() != grid_.dim || op.cols() != grid_.dim) {
        throw std::invalid_argument("HistoryVector: operator dimension mismatch");
      }
    }
  }
}

HistoryVector::HistoryVector(const ElementaryHistory& elementary, Complex coeff)
    : HistoryVector(elementary.grid, elementary.bridging, {Term{coeff, elementary.ops}}) {}

HistoryVector HistoryVector::superpose(
    const std::vector<std::pair<Complex, ElementaryHistory>>& terms) {
  if (terms.empty()) {
    throw std::invalid_argument("HistoryVector: empty superposition");
  }
  const TimeGrid& grid = terms.front().second.grid;
  const BridgingSet& bridging = terms.front().second.bridging;
  std::vector<Term> out;
  out.reserve(terms.size());
  for (const auto& [coeff, elem] : terms) {
    if (!(elem.grid == grid)) {
      throw std::invalid_argument("HistoryVector: terms must share one time grid");
    }
    if (!approx_equal(elem.bridging, bridging)) {
      throw std::invalid_argument("HistoryVector: terms must share one bridging set");
    }
    out.push_back(Term{coeff, elem.ops});
  }
  return HistoryVector(grid, bridging, std::move(out));
}

HistoryVector HistoryVector::scaled(Complex factor) const {
  std::vector<Term> terms = terms_;
  for (auto& term : terms) term.coeff *= factor;
  return HistoryVector(grid_, bridging_, std::move(terms));
}

HistoryVector HistoryVector::plus(const HistoryVector& other) const {
  check_same_frame(*this, other);
  std::vector<Term> terms = terms_;
  terms.insert(terms.end(), other.terms_.begin(), other.terms_.end());
  return HistoryVector(grid_, bridging_, std::move(terms));
}

HistoryVector operator+(const HistoryVector& a, const HistoryVector& b) { return a.plus(b); }
HistoryVector operator*(Complex c, const HistoryVector& h) { return h.scaled(c); }

Matrix chain_operator(const HistoryVector& h) {
  const int dim = h.grid().dim;
  Matrix total = Matrix::Zero(dim, dim);
  for (const auto& term : h.terms()) {
    Matrix acc = term.ops.front();
    for (std::size_t i = 1; i < term.ops.size(); ++i) {
      acc = term.ops[i] * h.bridging().step(i - 1) * acc;
    }
    total += term.coeff * acc;
  }
  return total;
}

double weight(const HistoryVector& h) {
  const Matrix k = chain_operator(h);
  return chain_dot(k, k).real();
}

Complex inner_product(const HistoryVector& h1, const HistoryVector& h2) {
  check_same_frame(h1, h2);
  return chain_dot(chain_operator(h1), chain_operator(h2));
}

bool equivalent(const HistoryVector& h1, const HistoryVector& h2, double tol) {
  check_same_frame(h1, h2);
  const Matrix k1 = chain_operator(h1);
  const Matrix k2 = chain_operator(h2);
  // Align global phase on the largest-magnitude entry of k2.
  Eigen::Index r = 0, c = 0;
  const double mag2 = k2.cwiseAbs().maxCoeff(&r, &c);
  if (mag2 <= tol) {
    return k1.cwiseAbs().maxCoeff() <= tol;
  }
  const Complex ref1 = k1(r, c);
  if (std::abs(ref1) <= tol && mag2 > tol) {
    return false;
  }
  const Complex phase = (ref1 / std::abs(ref1)) * (std::abs(k2(r, c)) / k2(r, c));
  return max_abs_diff(k1, phase * k2) <= tol;
}

HistoryVector normalize(const HistoryVector& h) {
  const double w = weight(h);
  if (w <= 1e-12) {
    throw std::domain_error("null history: inconsistent chain");
  }
  return h.scaled(1.0 / std::sqrt(w));
}

HistoryVector odot(const HistoryVector& late, const HistoryVector& early, const Matrix& bridge) {
  if (late.grid().dim != early.grid().dim) {
    throw std::invalid_argument("odot: fiber dimension mismatch");
  }
  if (bridge.rows() != early.grid().dim || bridge.cols() != early.grid().dim) {
    throw std::invalid_argument("odot: bridge dimension mismatch");
  }
  if (!is_unitary(bridge)) {
    throw std::invalid_argument("odot: bridge must be unitary");
  }

  std::vector<std::string> labels = early.grid().labels;
  labels.insert(labels.end(), late.grid().labels.begin(), late.grid().labels.end());
  std::set<std::string> unique(labels.begin(), labels.end());
  if (unique.size() != labels.size()) {
    labels.clear();
    for (std::size_t i = 0; i < early.grid().size() + late.grid().size(); ++i) {
      labels.push_back("t" + std::to_string(i));
    }
  }
  TimeGrid grid(std::move(labels), early.grid().dim);

  std::vector<Matrix> steps = early.bridging().steps();
  steps.push_back(bridge);
  steps.insert(steps.end(), late.bridging().steps().begin(), late.bridging().steps().end());
  BridgingSet bridging(std::move(steps));

  std::vector<HistoryVector::Term> terms;
  terms.reserve(early.terms().size() * late.terms().size());
  for (const auto& e : early.terms()) {
    for (const auto& l : late.terms()) {
      std::vector<Matrix> ops = e.ops;
      ops.insert(ops.end(), l.ops.begin(), l.ops.end());
      terms.push_back({e.coeff * l.coeff, std::move(ops)});
    }
  }
  return HistoryVector(std::move(grid), std::move(bridging), std::move(terms));
}

InjectionResult inject_measurement(const HistoryVector& h,
                                   const std::vector<Matrix>& per_time_ops) {
  if (per_time_ops.size() != h.grid().size()) {
    throw std::invalid_argument("inject_measurement: one operator per time label required");
  }
  for (const auto& m : per_time_ops) {
    if (m.rows() != h.grid().dim || m.cols() != h.grid().dim) {
      throw std::invalid_argument("inject_measurement: operator dimension mismatch");
    }
  }
  std::vector<HistoryVector::Term> terms = h.terms();
  for (auto& term : terms) {
    for (std::size_t i = 0; i < term.ops.size(); ++i) {
      term.ops[i] = per_time_ops[i] * term.ops[i] * per_time_ops[i].adjoint();
    }
  }
  HistoryVector raw(h.grid(), h.bridging(), std::move(terms));
  const double w = weight(raw);
  if (w <= 1e-12) {
    throw std::domain_error("measurement annihilates history");
  }
  const double alpha = 1.0 / std::sqrt(w);
  return InjectionResult{raw.scaled(alpha), alpha};
}

double history_expectation(const std::vector<std::pair<double, HistoryVector>>& observable_terms,
                           const HistoryVector& h) {
  if (observable_terms.empty()) {
    throw std::invalid_argument("history_expectation: empty observable");
  }
  if (std::abs(weight(h) - 1.0) > 1e-8) {
    throw std::invalid_argument("history_expectation: history is not normalized");
  }
  for (std::size_t i = 0; i < observable_terms.size(); ++i) {
    for (std::size_t j = i; j < observable_terms.size(); ++j) {
      const Complex g = inner_product(observable_terms[i].second, observable_terms[j].second);
      const Complex expected = (i == j) ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
      if (std::abs(g - expected) > 1e-8) {
        throw std::invalid_argument("history_expectation: eigen-histories are not orthonormal");
      }
    }
  }
  double value = 0.0;
  for (const auto& [a, eigenhistory] : observable_terms) {
    value += a * std::norm(inner_product(eigenhistory, h));
  }
  return value;
}

ConsistencyReport consistency_check(const std::vector<HistoryVector>& family) {
  if (family.empty()) {
    throw std::invalid_argument("consistency_check: empty family");
  }
  for (std::size_t i = 1; i < family.size(); ++i) {
    check_same_frame(family.front(), family[i]);
  }
  const std::size_t m = family.size();
  std::vector<Matrix> chains;
  chains.reserve(m);
  for (const auto& h : family) chains.push_back(chain_operator(h));

  ConsistencyReport report;
  report.gram = Matrix(m, m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      report.gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          chain_dot(chains[a], chains[b]);
    }
  }
  report.max_off_diagonal = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      if (a != b) {
        report.max_off_diagonal = std::max(
            report.max_off_diagonal,
            std::abs(report.gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))));
      }
    }
  }
  report.consistent = report.max_off_diagonal <= 1e-9;

  if (report.consistent) {
    // Weight additivity over a deterministic superposition.
    std::vector<Complex> coeffs(m);
    for (std::size_t a = 0; a < m; ++a) {
      coeffs[a] = Complex(1.0 + static_cast<double>(a), 0.5 * static_cast<double>(a));
    }
    Matrix combined = Matrix::Zero(family.front().grid().dim, family.front().grid().dim);
    double expected = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
      combined += coeffs[a] * chains[a];
      expected += std::norm(coeffs[a]) * chain_dot(chains[a], chains[a]).real();
    }
    report.additivity_deviation = std::abs(chain_dot(combined, combined).real() - expected);
  }
  return report;
}

CompletenessReport completeness_check(const std::vector<HistoryVector>& family,
                                      const std::vector<Complex>& coeffs) {
  if (family.empty() || family.size() != coeffs.size()) {
    throw std::invalid_argument("completeness_check: family/coefficients size mismatch");
  }
  for (std::size_t i = 1; i < family.size(); ++i) {
    check_same_frame(family.front(), family[i]);
  }
  const auto& grid = family.front().grid();
  const auto& bridging = family.front().bridging();

  Matrix combined = Matrix::Zero(grid.dim, grid.dim);
  double norm2 = 0.0;
  for (std::size_t a = 0; a < family.size(); ++a) {
    combined += coeffs[a] * chain_operator(family[a]);
    norm2 += std::norm(coeffs[a]);
  }
  const HistoryVector identity_history(
      grid, bridging,
      {HistoryVector::Term{1.0, std::vector<Matrix>(grid.size(), identity(grid.dim))}});
  const Matrix identity_chain = chain_operator(identity_history);

  CompletenessReport report;
  report.identity_deviation = max_abs_diff(combined, identity_chain);
  report.identity_chain = report.identity_deviation <= 1e-9;
  report.norm_deviation = std::abs(norm2 - 1.0);
  report.coefficients_normalized = report.norm_deviation <= 1e-9;
  return report;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back({m(r, c).real(), m(r, c).imag()});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Matrix();
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& e = j.at(r).at(c);
      m(r, c) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
    }
  }
  return m;
}

nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back({v(i).real(), v(i).imag()});
  }
  return out;
}

Vector vector_from_json(const nlohmann::json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = Complex(j.at(i).at(0).get<double>(), j.at(i).at(1).get<double>());
  }
  return v;
}

nlohmann::json to_json(const HistoryVector& h) {
  nlohmann::json j;
  j["grid"] = {{"labels", h.grid().labels}, {"dim", h.grid().dim}};
  nlohmann::json bridging = nlohmann::json::array();
  for (const auto& u : h.bridging().steps()) bridging.push_back(matrix_to_json(u));
  j["bridging"] = std::move(bridging);
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& term : h.terms()) {
    nlohmann::json ops = nlohmann::json::array();
    for (const auto& op : term.ops) ops.push_back(matrix_to_json(op));
    terms.push_back({{"coeff", {term.coeff.real(), term.coeff.imag()}}, {"ops", std::move(ops)}});
  }
  j["terms"] = std::move(terms);
  return j;
}

HistoryVector history_from_json(const nlohmann::json& j) {
  TimeGrid grid(j.at("grid").at("labels").get<std::vector<std::string>>(),
                j.at("grid").at("dim").get<int>());
  std::vector<Matrix> steps;
  for (const auto& u : j.at("bridging")) steps.push_back(matrix_from_json(u));
  BridgingSet bridging(std::move(steps));
  std::vector<HistoryVector::Term> terms;
  for (const auto& t : j.at("terms")) {
    HistoryVector::Term term;
    term.coeff = Complex(t.at("coeff").at(0).get<double>(), t.at("coeff").at(1).get<double>());
    for (const auto& op : t.at("ops")) term.ops.push_back(matrix_from_json(op));
    terms.push_back(std::move(term));
  }
  return HistoryVector(std::move(grid), std::move(bridging), std::move(terms));
}

}  // namespace qtc
