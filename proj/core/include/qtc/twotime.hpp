#ifndef QTC_TWOTIME_HPP
#define QTC_TWOTIME_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qtc/linalg.hpp"

#include "json.hpp"

namespace qtc {

/// Pre-selected ket, post-selected bra and the unitaries between the
/// boundary times and the measurement slots. For m intermediate slots the
/// stage list holds m+1 unitaries: U_1 evolves pre into slot 1, U_{k+1}
/// evolves slot k into slot k+1, and the last entry evolves the final slot
/// into the post-selection time.
struct TwoTimeState {
  Vector pre;
  Vector post;
  std::vector<Matrix> stage_unitaries;

  TwoTimeState(Vector pre_, Vector post_, std::vector<Matrix> stage_unitaries_);
};

struct NamedObservable {
  std::string name;
  Matrix op;
};

/// A measurement slot: the time it occupies and the settings available there.
struct MeasurementSlot {
  std::string time_label;
  std::vector<NamedObservable> settings;
};

/// Joint outcome distribution for one choice of settings. Outcome tuples are
/// ordered earliest slot first; for dichotomic observables the outcome values
/// are +-1 (+1 listed first).
class JointDistribution {
 public:
  JointDistribution(std::vector<std::string> setting_names,
                    std::vector<std::vector<double>> slot_eigenvalues,
                    std::vector<double> probabilities);

  const std::vector<std::string>& setting_names() const { return setting_names_; }
  std::size_t slot_count() const { return slot_eigenvalues_.size(); }
  std::size_t outcome_count() const { return probabilities_.size(); }

  /// Eigenvalues available at a slot, in enumeration order (descending).
  const std::vector<double>& slot_outcomes(std::size_t slot) const {
    return slot_eigenvalues_.at(slot);
  }

  /// Probability of an outcome tuple given as per-slot indices.
  double probability_by_index(const std::vector<std::size_t>& indices) const;

  /// Probability of a +-1 outcome tuple (all slots dichotomic).
  double probability(const std::vector<int>& outcomes) const;

  /// All outcome tuples in enumeration order as per-slot indices.
  std::vector<std::vector<std::size_t>> outcome_indices() const;

  /// Eigenvalue tuple for an indexed outcome.
  std::vector<double> outcome_values(const std::vector<std::size_t>& indices) const;

  double total() const;

  /// Key like "+-" for dichotomic slots, or digit string of indices.
  std::string outcome_key(const std::vector<std::size_t>& indices) const;

 private:
  std::vector<std::string> setting_names_;
  std::vector<std::vector<double>> slot_eigenvalues_;
  std::vector<double> probabilities_;  // mixed-radix order, earliest slot slowest

  std::size_t flat_index(const std::vector<std::size_t>& indices) const;
};

/// ABL probability of each eigenvalue of `observable` for a single
/// intermediate measurement between pre- and post-selection. Requires
/// exactly two stage unitaries. Throws std::domain_error
/// ("post-selection impossible") when the normalization vanishes.
std::map<double, double> abl_probability(const TwoTimeState& tts, const Matrix& observable);

/// Looks up a probability table keyed by computed eigenvalues, matching
/// within `tol`.
double probability_for(const std::map<double, double>& table, double eigenvalue,
                       double tol = 1e-6);

/// Joint distribution over outcome tuples of projective measurements at each
/// slot. With a post-selected state the amplitude chain is normalized per
/// settings choice (ABL); without one it is a forward Lüders sequence.
/// `stage_unitaries` holds m entries without post-selection and m+1 with it.
JointDistribution joint_distribution(const Vector& pre,
                                     const std::vector<NamedObservable>& chosen,
                                     const std::vector<Matrix>& stage_unitaries,
                                     const std::optional<Vector>& post);

/// Marginal over a nonempty subset of slots (indices into the tuple).
std::map<std::vector<int>, double> marginal(const JointDistribution& d,
                                            const std::vector<std::size_t>& keep_slots);

struct SignalingReport {
  bool past_independent = false;   // p(a|x) does not depend on the later setting
  bool future_independent = false; // p(b|y) does not depend on the earlier setting
  double max_past_deviation = 0.0;
  double max_future_deviation = 0.0;
  std::string past_witness;        // setting pair with the largest deviation
  std::string future_witness;
};

/// Two-slot forward-only chains: checks both marginal-independence
/// directions over every pair of settings. Requires at least two settings
/// per slot.
SignalingReport signaling_report(const Vector& pre, const std::vector<MeasurementSlot>& slots,
                                 const std::vector<Matrix>& stage_unitaries,
                                 double tol = 1e-9);

nlohmann::json to_json(const JointDistribution& d);

}  // namespace qtc

#endif  // QTC_TWOTIME_HPP
