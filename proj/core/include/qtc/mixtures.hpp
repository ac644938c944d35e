#ifndef QTC_MIXTURES_HPP
#define QTC_MIXTURES_HPP

#include <string>
#include <utility>
#include <vector>

#include "qtc/histories.hpp"

namespace qtc {

/// Probabilistic ensemble of normalized histories sharing one grid and one
/// bridging set; represents the super-operator sum_i p_i |H_i)(H_i|.
class MixedHistory {
 public:
  using Member = std::pair<double, HistoryVector>;

  explicit MixedHistory(std::vector<Member> ensemble);

  const std::vector<Member>& ensemble() const { return ensemble_; }
  const TimeGrid& grid() const { return ensemble_.front().second.grid(); }
  const BridgingSet& bridging() const { return ensemble_.front().second.bridging(); }

 private:
  std::vector<Member> ensemble_;
};

/// Validated constructor: probabilities nonnegative and summing to 1 within
/// 1e-10; members normalized under the chain inner product.
MixedHistory mix(std::vector<std::pair<double, HistoryVector>> ensemble);

/// Gram-projected density matrix of the mixture in an orthonormal history
/// basis: rho_jk = sum_i p_i (b_j|H_i)(H_i|b_k). Hermitian, PSD, trace <= 1.
Matrix matrix_representation(const MixedHistory& m, const std::vector<HistoryVector>& basis);

/// Temporal partial trace: contracts the history super-operator over the
/// time slots not listed in `keep` (slot-wise Hilbert-Schmidt contraction),
/// eigendecomposes the reduced operator and returns the spectral ensemble.
/// Bridging on the kept slots is the ordered product of the original
/// adjacent unitaries spanning each gap. Reduced branches whose chain
/// operator vanishes are dropped; probabilities are renormalized to sum 1.
MixedHistory temporal_partial_trace(const HistoryVector& h, const std::vector<std::string>& keep);
MixedHistory temporal_partial_trace(const MixedHistory& m, const std::vector<std::string>& keep);

nlohmann::json to_json(const MixedHistory& m);

}  // namespace qtc

#endif  // QTC_MIXTURES_HPP
