#include "qtc/mixtures.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace qtc {

namespace {

constexpr double kEigenvalueFloor = 1e-10;

Vector vectorize(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

/// Kept-slot chunk of one term as a vector in the tensor product of the
/// per-slot operator spaces (earliest kept slot = slowest index).
Vector kept_chunk_vector(const std::vector<Matrix>& ops, const std::vector<std::size_t>& kept) {
  Vector acc = vectorize(ops[kept.front()]);
  for (std::size_t i = 1; i < kept.size(); ++i) {
    const Vector next = vectorize(ops[kept[i]]);
    Vector combined(acc.size() * next.size());
    for (Eigen::Index a = 0; a < acc.size(); ++a) {
      combined.segment(a * next.size(), next.size()) = acc(a) * next;
    }
    acc = std::move(combined);
  }
  return acc;
}

struct ReductionTerm {
  Complex coeff;                 // original coefficient scaled by sqrt(p) context
  std::vector<Matrix> kept_ops;  // ops restricted to kept slots
  Vector chunk;                  // vectorized kept chunk
  std::vector<Complex> traced;   // per traced slot, the op (used for pair contraction)
};

MixedHistory reduce(const std::vector<std::pair<double, HistoryVector>>& sources,
                    const std::vector<std::string>& keep) {
  const HistoryVector& first = sources.front().second;
  const TimeGrid& grid = first.grid();
  const int dim = grid.dim;

  if (keep.empty()) {
    throw std::invalid_argument("temporal_partial_trace: keep set must be nonempty");
  }
  std::set<std::size_t> kept_set;
  for (const auto& label : keep) {
    kept_set.insert(grid.index_of(label));
  }
  if (kept_set.size() == grid.size()) {
    throw std::invalid_argument("temporal_partial_trace: keep set must be a proper subset");
  }
  const std::vector<std::size_t> kept(kept_set.begin(), kept_set.end());
  std::vector<std::size_t> traced;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!kept_set.count(i)) traced.push_back(i);
  }

  // Collect the weighted terms of every source history.
  struct Entry {
    Complex coeff;  // includes sqrt(p_i) of the source member
    const std::vector<Matrix>* ops;
  };
  std::vector<Entry> entries;
  for (const auto& [p, h] : sources) {
    const double scale = std::sqrt(p);
    for (const auto& term : h.terms()) {
      entries.push_back({scale * term.coeff, &term.ops});
    }
  }

  const std::size_t n_terms = entries.size();
  std::vector<Vector> chunks(n_terms);
  for (std::size_t s = 0; s < n_terms; ++s) {
    chunks[s] = kept_chunk_vector(*entries[s].ops, kept);
  }
  const Eigen::Index big_dim = chunks.front().size();
  if (big_dim > 4096) {
    throw std::invalid_argument("temporal_partial_trace: kept operator space too large");
  }

  // Reduced operator R = sum_{s,t} c_s conj(c_t) f_{s,t} |chunk_s)(chunk_t|
  // with f the product of Hilbert-Schmidt contractions over traced slots.
  Matrix reduced = Matrix::Zero(big_dim, big_dim);
  for (std::size_t s = 0; s < n_terms; ++s) {
    for (std::size_t t = 0; t < n_terms; ++t) {
      Complex factor = entries[s].coeff * std::conj(entries[t].coeff);
      for (const auto j : traced) {
        factor *= ((*entries[t].ops)[j].adjoint() * (*entries[s].ops)[j]).trace();
      }
      if (factor != Complex(0.0, 0.0)) {
        reduced += factor * (chunks[s] * chunks[t].adjoint());
      }
    }
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver((reduced + reduced.adjoint()) / 2.0);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("temporal_partial_trace: eigendecomposition failed");
  }

  // Output frame: kept labels, bridging composed through the traced gaps.
  std::vector<std::string> kept_labels;
  for (const auto i : kept) kept_labels.push_back(grid.labels[i]);
  TimeGrid kept_grid(std::move(kept_labels), dim);
  std::vector<Matrix> steps;
  for (std::size_t i = 0; i + 1 < kept.size(); ++i) {
    steps.push_back(first.bridging().transfer(kept[i], kept[i + 1]));
  }
  BridgingSet kept_bridging(std::move(steps));

  // Least-squares frame for expressing eigenvectors over the term chunks.
  Matrix chunk_matrix(big_dim, static_cast<Eigen::Index>(n_terms));
  for (std::size_t s = 0; s < n_terms; ++s) {
    chunk_matrix.col(static_cast<Eigen::Index>(s)) = chunks[s];
  }
  const Eigen::ColPivHouseholderQR<Matrix> lsq(chunk_matrix);

  // Retained spectral branches, largest eigenvalue first, as coefficient
  // vectors over the term chunks.
  std::vector<double> lambdas;
  std::vector<Vector> coeff_vectors;
  for (Eigen::Index k = solver.eigenvalues().size() - 1; k >= 0; --k) {
    const double lambda = solver.eigenvalues()(k);
    if (lambda <= kEigenvalueFloor) break;  // ascending order: the rest are smaller
    lambdas.push_back(lambda);
    coeff_vectors.push_back(lsq.solve(solver.eigenvectors().col(k)));
  }

  const auto member_chain = [&](const Vector& a) {
    Matrix k_op = Matrix::Zero(dim, dim);
    for (std::size_t s = 0; s < n_terms; ++s) {
      const Complex coeff = a(static_cast<Eigen::Index>(s));
      if (coeff == Complex(0.0, 0.0)) continue;
      Matrix acc = (*entries[s].ops)[kept.front()];
      for (std::size_t i = 1; i < kept.size(); ++i) {
        acc = (*entries[s].ops)[kept[i]] * kept_bridging.step(i - 1) * acc;
      }
      k_op += coeff * acc;
    }
    return k_op;
  };

  // The spectral basis of a degenerate eigenvalue is arbitrary; rotate each
  // degenerate block so the branches are also chain-orthogonal (the reduced
  // ensemble stays consistent where the spectrum allows it).
  for (std::size_t lo = 0; lo < lambdas.size();) {
    std::size_t hi = lo + 1;
    while (hi < lambdas.size() && std::abs(lambdas[hi] - lambdas[lo]) <= 1e-9) ++hi;
    const std::size_t g = hi - lo;
    if (g > 1) {
      Matrix gram(g, g);
      std::vector<Matrix> block_chains;
      for (std::size_t i = 0; i < g; ++i) block_chains.push_back(member_chain(coeff_vectors[lo + i]));
      for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t j = 0; j < g; ++j) {
          gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              block_chains[i].conjugate().cwiseProduct(block_chains[j]).sum();
        }
      }
      Eigen::SelfAdjointEigenSolver<Matrix> block_solver((gram + gram.adjoint()) / 2.0);
      const Matrix rotation = block_solver.eigenvectors();
      std::vector<Vector> rotated(g, Vector::Zero(static_cast<Eigen::Index>(n_terms)));
      for (std::size_t k = 0; k < g; ++k) {
        for (std::size_t i = 0; i < g; ++i) {
          rotated[k] += rotation(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) *
                        coeff_vectors[lo + i];
        }
      }
      for (std::size_t k = 0; k < g; ++k) coeff_vectors[lo + k] = std::move(rotated[k]);
    }
    lo = hi;
  }

  std::vector<std::pair<double, HistoryVector>> ensemble;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    const Vector& a = coeff_vectors[k];
    std::vector<HistoryVector::Term> terms;
    for (std::size_t s = 0; s < n_terms; ++s) {
      const Complex coeff = a(static_cast<Eigen::Index>(s));
      if (std::abs(coeff) < 1e-13) continue;
      std::vector<Matrix> ops;
      ops.reserve(kept.size());
      for (const auto i : kept) ops.push_back((*entries[s].ops)[i]);
      terms.push_back({coeff, std::move(ops)});
    }
    if (terms.empty()) continue;
    HistoryVector member(kept_grid, kept_bridging, std::move(terms));
    if (weight(member) <= 1e-12) continue;  // chain-inconsistent branch, dropped
    ensemble.emplace_back(lambdas[k], normalize(member));
  }

  if (ensemble.empty()) {
    throw std::domain_error("temporal_partial_trace: reduction has no consistent branch");
  }
  double total = 0.0;
  for (const auto& [p, h] : ensemble) total += p;
  for (auto& [p, h] : ensemble) p /= total;
  return MixedHistory(std::move(ensemble));
}

}  // namespace

MixedHistory::MixedHistory(std::vector<Member> ensemble) : ensemble_(std::move(ensemble)) {
  if (ensemble_.empty()) {
    throw std::invalid_argument("MixedHistory: empty ensemble");
  }
  const auto& first = ensemble_.front().second;
  for (const auto& [p, h] : ensemble_) {
    if (!(h.grid() == first.grid()) || !approx_equal(h.bridging(), first.bridging())) {
      throw std::invalid_argument("MixedHistory: members must share grid and bridging");
    }
  }
}

MixedHistory mix(std::vector<std::pair<double, HistoryVector>> ensemble) {
  double total = 0.0;
  for (const auto& [p, h] : ensemble) {
    if (p < 0.0 || p > 1.0 + 1e-12) {
      throw std::invalid_argument("mix: probabilities must lie in [0, 1]");
    }
    if (std::abs(weight(h) - 1.0) > 1e-9) {
      throw std::invalid_argument("mix: ensemble members must be normalized");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-10) {
    throw std::invalid_argument("mix: probabilities must sum to 1");
  }
  return MixedHistory(std::move(ensemble));
}

Matrix matrix_representation(const MixedHistory& m, const std::vector<HistoryVector>& basis) {
  if (basis.empty()) {
    throw std::invalid_argument("matrix_representation: empty basis");
  }
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = i; j < basis.size(); ++j) {
      const Complex g = inner_product(basis[i], basis[j]);
      const Complex expected = (i == j) ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
      if (std::abs(g - expected) > 1e-8) {
        throw std::invalid_argument("matrix_representation: basis is not orthonormal");
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(basis.size());
  Matrix rho = Matrix::Zero(n, n);
  for (const auto& [p, h] : m.ensemble()) {
    Vector overlaps(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      overlaps(j) = inner_product(basis[static_cast<std::size_t>(j)], h);
    }
    rho += p * (overlaps * overlaps.adjoint());
  }
  return rho;
}

MixedHistory temporal_partial_trace(const HistoryVector& h, const std::vector<std::string>& keep) {
  return reduce({{1.0, h}}, keep);
}

MixedHistory temporal_partial_trace(const MixedHistory& m, const std::vector<std::string>& keep) {
  return reduce(m.ensemble(), keep);
}

nlohmann::json to_json(const MixedHistory& m) {
  nlohmann::json members = nlohmann::json::array();
  for (const auto& [p, h] : m.ensemble()) {
    members.push_back({{"probability", p}, {"history", to_json(h)}});
  }
  return {{"ensemble", std::move(members)}};
}

}  // namespace qtc
