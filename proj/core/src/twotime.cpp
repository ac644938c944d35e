#include "qtc/twotime.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qtc {

namespace {

constexpr double kClampFloor = 1e-12;

std::vector<std::vector<EigenProjector>> decompose_all(
    const std::vector<NamedObservable>& chosen) {
  std::vector<std::vector<EigenProjector>> out;
  out.reserve(chosen.size());
  for (const auto& obs : chosen) {
    out.push_back(dichotomic_projectors(obs.op));
  }
  return out;
}

void advance(std::vector<std::size_t>& indices, const std::vector<std::size_t>& radix) {
  for (std::size_t slot = radix.size(); slot-- > 0;) {
    if (++indices[slot] < radix[slot]) return;
    indices[slot] = 0;
  }
}

}  // namespace

TwoTimeState::TwoTimeState(Vector pre_, Vector post_, std::vector<Matrix> stage_unitaries_)
    : pre(std::move(pre_)), post(std::move(post_)), stage_unitaries(std::move(stage_unitaries_)) {
  if (!is_normalized(pre) || !is_normalized(post)) {
    throw std::invalid_argument("TwoTimeState: boundary states must be normalized");
  }
  if (pre.size() != post.size()) {
    throw std::invalid_argument("TwoTimeState: boundary dimension mismatch");
  }
  for (const auto& u : stage_unitaries) {
    if (u.rows() != pre.size() || u.cols() != pre.size() || !is_unitary(u)) {
      throw std::invalid_argument("TwoTimeState: stage operators must be unitaries of matching dimension");
    }
  }
}

JointDistribution::JointDistribution(std::vector<std::string> setting_names,
                                     std::vector<std::vector<double>> slot_eigenvalues,
                                     std::vector<double> probabilities)
    : setting_names_(std::move(setting_names)),
      slot_eigenvalues_(std::move(slot_eigenvalues)),
      probabilities_(std::move(probabilities)) {
  std::size_t expected = 1;
  for (const auto& evs : slot_eigenvalues_) expected *= evs.size();
  if (expected != probabilities_.size()) {
    throw std::invalid_argument("JointDistribution: probability table size mismatch");
  }
}

std::size_t JointDistribution::flat_index(const std::vector<std::size_t>& indices) const {
  if (indices.size() != slot_eigenvalues_.size()) {
    throw std::invalid_argument("JointDistribution: outcome tuple length mismatch");
  }
  std::size_t flat = 0;
  for (std::size_t slot = 0; slot < indices.size(); ++slot) {
    const std::size_t radix = slot_eigenvalues_[slot].size();
    if (indices[slot] >= radix) {
      throw std::out_of_range("JointDistribution: outcome index out of range");
    }
    flat = flat * radix + indices[slot];
  }
  return flat;
}

double JointDistribution::probability_by_index(const std::vector<std::size_t>& indices) const {
  return probabilities_[flat_index(indices)];
}

double JointDistribution::probability(const std::vector<int>& outcomes) const {
  std::vector<std::size_t> indices(outcomes.size());
  for (std::size_t slot = 0; slot < outcomes.size(); ++slot) {
    const auto& evs = slot_eigenvalues_.at(slot);
    bool found = false;
    for (std::size_t k = 0; k < evs.size(); ++k) {
      if (std::abs(evs[k] - static_cast<double>(outcomes[slot])) < 1e-6) {
        indices[slot] = k;
        found = true;
        break;
      }
    }
    if (!found) {
      throw std::invalid_argument("JointDistribution: outcome value not in slot spectrum");
    }
  }
  return probability_by_index(indices);
}

std::vector<std::vector<std::size_t>> JointDistribution::outcome_indices() const {
  std::vector<std::size_t> radix;
  radix.reserve(slot_eigenvalues_.size());
  for (const auto& evs : slot_eigenvalues_) radix.push_back(evs.size());

  std::vector<std::vector<std::size_t>> out;
  out.reserve(probabilities_.size());
  std::vector<std::size_t> indices(radix.size(), 0);
  for (std::size_t i = 0; i < probabilities_.size(); ++i) {
    out.push_back(indices);
    advance(indices, radix);
  }
  return out;
}

std::vector<double> JointDistribution::outcome_values(
    const std::vector<std::size_t>& indices) const {
  std::vector<double> values(indices.size());
  for (std::size_t slot = 0; slot < indices.size(); ++slot) {
    values[slot] = slot_eigenvalues_.at(slot).at(indices[slot]);
  }
  return values;
}

double JointDistribution::total() const {
  double sum = 0.0;
  for (const double p : probabilities_) sum += p;
  return sum;
}

std::string JointDistribution::outcome_key(const std::vector<std::size_t>& indices) const {
  bool all_dichotomic = true;
  for (const auto& evs : slot_eigenvalues_) {
    if (evs.size() != 2 || std::abs(evs[0] - 1.0) > 1e-6 || std::abs(evs[1] + 1.0) > 1e-6) {
      all_dichotomic = false;
      break;
    }
  }
  std::string key;
  for (std::size_t slot = 0; slot < indices.size(); ++slot) {
    if (all_dichotomic) {
      key += (indices[slot] == 0) ? '+' : '-';
    } else {
      key += std::to_string(indices[slot]);
      if (slot + 1 < indices.size()) key += '.';
    }
  }
  return key;
}

std::map<double, double> abl_probability(const TwoTimeState& tts, const Matrix& observable) {
  if (tts.stage_unitaries.size() != 2) {
    throw std::invalid_argument("abl_probability: exactly one intermediate slot (two stage unitaries) required");
  }
  const auto spectral = dichotomic_projectors(observable);
  const Vector evolved = tts.stage_unitaries[0] * tts.pre;
  const Vector back = tts.stage_unitaries[1].adjoint() * tts.post;

  std::map<double, double> numerators;
  double normalization = 0.0;
  for (const auto& [eigenvalue, proj] : spectral) {
    const Complex amp = back.adjoint() * (proj * evolved);
    double n = std::norm(amp);
    if (n < kClampFloor) n = 0.0;
    numerators[eigenvalue] = n;
    normalization += n;
  }
  if (normalization <= 1e-14) {
    throw std::domain_error("post-selection impossible");
  }
  for (auto& [eigenvalue, p] : numerators) p /= normalization;
  return numerators;
}

double probability_for(const std::map<double, double>& table, double eigenvalue, double tol) {
  for (const auto& [ev, p] : table) {
    if (std::abs(ev - eigenvalue) <= tol) return p;
  }
  throw std::invalid_argument("probability_for: eigenvalue not present in table");
}

JointDistribution joint_distribution(const Vector& pre,
                                     const std::vector<NamedObservable>& chosen,
                                     const std::vector<Matrix>& stage_unitaries,
                                     const std::optional<Vector>& post) {
  if (!is_normalized(pre)) {
    throw std::invalid_argument("joint_distribution: pre-selected state must be normalized");
  }
  const std::size_t m = chosen.size();
  if (m == 0) {
    throw std::invalid_argument("joint_distribution: at least one slot required");
  }
  const std::size_t expected_stages = post.has_value() ? m + 1 : m;
  if (stage_unitaries.size() != expected_stages) {
    throw std::invalid_argument("joint_distribution: stage unitary count mismatch");
  }
  if (post.has_value() && !is_normalized(*post)) {
    throw std::invalid_argument("joint_distribution: post-selected state must be normalized");
  }

  const auto spectral = decompose_all(chosen);
  std::vector<std::string> names;
  std::vector<std::vector<double>> slot_eigenvalues;
  std::vector<std::size_t> radix;
  names.reserve(m);
  for (std::size_t slot = 0; slot < m; ++slot) {
    names.push_back(chosen[slot].name);
    std::vector<double> evs;
    for (const auto& ep : spectral[slot]) evs.push_back(ep.eigenvalue);
    slot_eigenvalues.push_back(std::move(evs));
    radix.push_back(spectral[slot].size());
  }

  std::size_t n_outcomes = 1;
  for (const auto r : radix) n_outcomes *= r;

  std::vector<double> probs(n_outcomes, 0.0);
  std::vector<std::size_t> indices(m, 0);
  for (std::size_t i = 0; i < n_outcomes; ++i) {
    Vector state = pre;
    for (std::size_t slot = 0; slot < m; ++slot) {
      state = spectral[slot][indices[slot]].projector * (stage_unitaries[slot] * state);
    }
    double p;
    if (post.has_value()) {
      const Complex amp = post->adjoint() * (stage_unitaries[m] * state);
      p = std::norm(amp);
    } else {
      p = state.squaredNorm();
    }
    if (p < kClampFloor) p = 0.0;
    probs[i] = p;
    advance(indices, radix);
  }

  if (post.has_value()) {
    double total = 0.0;
    for (const double p : probs) total += p;
    if (total <= 1e-14) {
      throw std::domain_error("post-selection impossible");
    }
    for (double& p : probs) p /= total;
  }
  return JointDistribution(std::move(names), std::move(slot_eigenvalues), std::move(probs));
}

std::map<std::vector<int>, double> marginal(const JointDistribution& d,
                                            const std::vector<std::size_t>& keep_slots) {
  if (keep_slots.empty()) {
    throw std::invalid_argument("marginal: keep set must be nonempty");
  }
  for (const auto slot : keep_slots) {
    if (slot >= d.slot_count()) {
      throw std::out_of_range("marginal: slot index out of range");
    }
  }
  std::map<std::vector<int>, double> out;
  for (const auto& indices : d.outcome_indices()) {
    const auto values = d.outcome_values(indices);
    std::vector<int> key;
    key.reserve(keep_slots.size());
    for (const auto slot : keep_slots) {
      key.push_back(static_cast<int>(std::lround(values[slot])));
    }
    out[key] += d.probability_by_index(indices);
  }
  return out;
}

SignalingReport signaling_report(const Vector& pre, const std::vector<MeasurementSlot>& slots,
                                 const std::vector<Matrix>& stage_unitaries, double tol) {
  if (slots.size() != 2) {
    throw std::invalid_argument("signaling_report: exactly two slots required");
  }
  if (slots[0].settings.size() < 2 || slots[1].settings.size() < 2) {
    throw std::invalid_argument("signaling_report: at least two settings per slot required");
  }

  SignalingReport report;
  report.past_independent = true;
  report.future_independent = true;

  // Marginal of the early slot for each (x, y); compare across y.
  for (const auto& x : slots[0].settings) {
    for (std::size_t yi = 0; yi < slots[1].settings.size(); ++yi) {
      for (std::size_t yj = yi + 1; yj < slots[1].settings.size(); ++yj) {
        const auto d1 = joint_distribution(pre, {x, slots[1].settings[yi]}, stage_unitaries, {});
        const auto d2 = joint_distribution(pre, {x, slots[1].settings[yj]}, stage_unitaries, {});
        const auto m1 = marginal(d1, {0});
        const auto m2 = marginal(d2, {0});
        for (const auto& [key, p1] : m1) {
          const double dev = std::abs(p1 - m2.at(key));
          if (dev > report.max_past_deviation) {
            report.max_past_deviation = dev;
            report.past_witness = "x=" + x.name + " y=" + slots[1].settings[yi].name + "|" +
                                  slots[1].settings[yj].name;
          }
        }
      }
    }
  }

  // Marginal of the late slot for each (x, y); compare across x.
  for (const auto& y : slots[1].settings) {
    for (std::size_t xi = 0; xi < slots[0].settings.size(); ++xi) {
      for (std::size_t xj = xi + 1; xj < slots[0].settings.size(); ++xj) {
        const auto d1 = joint_distribution(pre, {slots[0].settings[xi], y}, stage_unitaries, {});
        const auto d2 = joint_distribution(pre, {slots[0].settings[xj], y}, stage_unitaries, {});
        const auto m1 = marginal(d1, {1});
        const auto m2 = marginal(d2, {1});
        for (const auto& [key, p1] : m1) {
          const double dev = std::abs(p1 - m2.at(key));
          if (dev > report.max_future_deviation) {
            report.max_future_deviation = dev;
            report.future_witness = "y=" + y.name + " x=" + slots[0].settings[xi].name + "|" +
                                    slots[0].settings[xj].name;
          }
        }
      }
    }
  }

  report.past_independent = report.max_past_deviation <= tol;
  report.future_independent = report.max_future_deviation <= tol;
  return report;
}

nlohmann::json to_json(const JointDistribution& d) {
  nlohmann::json j;
  j["settings"] = d.setting_names();
  nlohmann::json probs = nlohmann::json::object();
  for (const auto& indices : d.outcome_indices()) {
    probs[d.outcome_key(indices)] = d.probability_by_index(indices);
  }
  j["probabilities"] = std::move(probs);
  return j;
}

}  // namespace qtc
