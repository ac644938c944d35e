#ifndef QTC_BUNDLE_HPP
#define QTC_BUNDLE_HPP

#include <optional>
#include <string>
#include <vector>

#include "qtc/histories.hpp"
#include "qtc/twotime.hpp"

namespace qtc {

/// Discrete-time history bundle: a state-space fiber per time, bridging
/// dynamics, a pre-selected state at the first time and optionally a
/// post-selected state at the last.
struct HistoryBundle {
  TimeGrid grid;
  BridgingSet bridging;
  Vector pre;
  std::optional<Vector> post;

  HistoryBundle(TimeGrid grid_, BridgingSet bridging_, Vector pre_,
                std::optional<Vector> post_ = std::nullopt);

  /// Number of intermediate measurement slots (times strictly between the
  /// boundary times).
  std::size_t slot_count() const { return grid.size() - 2; }
};

/// A state per time of the bundle's grid.
struct Section {
  std::vector<Vector> states;
};

struct SectionHistory {
  HistoryVector history;
  double weight = 0.0;
  bool consistent = false;  // weight > 1e-12
};

/// The elementary history of a section: the rank-1 projector onto s(t) at
/// each time, joined by the bundle's bridging.
SectionHistory section_to_history(const HistoryBundle& b, const Section& s);

/// One history per outcome tuple of the chosen settings, between the fixed
/// pre/post endpoints.
struct MeasurementFiber {
  std::vector<std::string> settings;
  std::vector<std::size_t> outcome_indices;  // per-slot spectral index (0 = largest eigenvalue)
  std::vector<double> outcome_values;        // eigenvalues, +-1 for dichotomic settings
  HistoryVector history;
  double abl_weight = 0.0;  // joint probability of this outcome tuple
  bool annihilated = false; // zero-weight fiber, kept and flagged
};

/// Builds the fiber family for one settings choice (one observable per
/// intermediate slot). Requires a post-selected bundle.
std::vector<MeasurementFiber> fibers_for_settings(const HistoryBundle& b,
                                                  const std::vector<NamedObservable>& settings);

struct CorrespondenceReport {
  double max_deviation = 0.0;
  bool pass = false;
  std::size_t fiber_count = 0;
};

/// Checks |H_outcome) ~ p(outcome|settings): the chain weight of each fiber
/// history, normalized over the outcome set, against the ABL joint
/// probability.
CorrespondenceReport verify_weight_correspondence(const HistoryBundle& b,
                                                  const std::vector<NamedObservable>& settings,
                                                  double tol = 1e-9);

/// JSON document {grid, pre, post, settings, fibers}.
nlohmann::json bundle_to_json(const HistoryBundle& b, const std::vector<MeasurementFiber>& fibers);

/// DOT digraph with one node per (time, branch), stable names "t{i}_{branch}",
/// one edge per fiber segment annotated with the fiber weight (6 significant
/// digits); zero-weight fibers are dashed and carry inconsistent=true.
std::string bundle_to_dot(const HistoryBundle& b, const std::vector<MeasurementFiber>& fibers);

}  // namespace qtc

#endif  // QTC_BUNDLE_HPP
