#include "qtc/bundle.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace qtc {

namespace {

std::string format_weight(double w) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", w);
  return buf;
}

std::string node_name(std::size_t time_index, std::size_t grid_size, std::size_t branch) {
  if (time_index == 0) return "t0_pre";
  if (time_index + 1 == grid_size) {
    return "t" + std::to_string(time_index) + "_post";
  }
  return "t" + std::to_string(time_index) + "_" + std::to_string(branch);
}

}  // namespace

HistoryBundle::HistoryBundle(TimeGrid grid_, BridgingSet bridging_, Vector pre_,
                             std::optional<Vector> post_)
    : grid(std::move(grid_)), bridging(std::move(bridging_)), pre(std::move(pre_)),
      post(std::move(post_)) {
  if (grid.size() < 2) {
    throw std::invalid_argument("HistoryBundle: grid needs boundary times");
  }
  if (bridging.size() + 1 != grid.size()) {
    throw std::invalid_argument("HistoryBundle: bridging/grid size mismatch");
  }
  if (pre.size() != grid.dim || !is_normalized(pre)) {
    throw std::invalid_argument("HistoryBundle: pre-selected state must be normalized with the grid dimension");
  }
  if (post.has_value() && (post->size() != grid.dim || !is_normalized(*post))) {
    throw std::invalid_argument("HistoryBundle: post-selected state must be normalized with the grid dimension");
  }
}

SectionHistory section_to_history(const HistoryBundle& b, const Section& s) {
  if (s.states.size() != b.grid.size()) {
    throw std::invalid_argument("section_to_history: one state per time label required");
  }
  std::vector<Matrix> ops;
  ops.reserve(s.states.size());
  for (const auto& state : s.states) {
    if (state.size() != b.grid.dim) {
      throw std::invalid_argument("section_to_history: state dimension mismatch");
    }
    if (!is_normalized(state)) {
      throw std::invalid_argument("section_to_history: section states must be normalized");
    }
    ops.push_back(projector(state));
  }
  HistoryVector history(b.grid, b.bridging, {HistoryVector::Term{1.0, std::move(ops)}});
  const double w = weight(history);
  return SectionHistory{std::move(history), w, w > 1e-12};
}

std::vector<MeasurementFiber> fibers_for_settings(const HistoryBundle& b,
                                                  const std::vector<NamedObservable>& settings) {
  if (!b.post.has_value()) {
    throw std::invalid_argument("fibers_for_settings: bundle has no post-selected state");
  }
  if (settings.size() != b.slot_count()) {
    throw std::invalid_argument("fibers_for_settings: one observable per intermediate slot required");
  }

  // Joint ABL distribution over the outcome tuples for these settings.
  const JointDistribution dist =
      joint_distribution(b.pre, settings, b.bridging.steps(), b.post);

  std::vector<std::vector<EigenProjector>> spectral;
  spectral.reserve(settings.size());
  for (const auto& obs : settings) spectral.push_back(dichotomic_projectors(obs.op));

  std::vector<std::string> names;
  for (const auto& obs : settings) names.push_back(obs.name);

  const Matrix pre_proj = projector(b.pre);
  const Matrix post_proj = projector(*b.post);

  std::vector<MeasurementFiber> fibers;
  for (const auto& indices : dist.outcome_indices()) {
    std::vector<Matrix> ops;
    ops.reserve(b.grid.size());
    ops.push_back(pre_proj);
    for (std::size_t slot = 0; slot < indices.size(); ++slot) {
      ops.push_back(spectral[slot][indices[slot]].projector);
    }
    ops.push_back(post_proj);

    MeasurementFiber fiber{
        names,
        indices,
        dist.outcome_values(indices),
        HistoryVector(b.grid, b.bridging, {HistoryVector::Term{1.0, std::move(ops)}}),
        dist.probability_by_index(indices),
        false,
    };
    fiber.annihilated = fiber.abl_weight <= 1e-12;
    fibers.push_back(std::move(fiber));
  }
  return fibers;
}

CorrespondenceReport verify_weight_correspondence(const HistoryBundle& b,
                                                  const std::vector<NamedObservable>& settings,
                                                  double tol) {
  const auto fibers = fibers_for_settings(b, settings);

  double total_chain_weight = 0.0;
  std::vector<double> chain_weights;
  chain_weights.reserve(fibers.size());
  for (const auto& fiber : fibers) {
    chain_weights.push_back(weight(fiber.history));
    total_chain_weight += chain_weights.back();
  }
  if (total_chain_weight <= 1e-14) {
    throw std::domain_error("post-selection impossible");
  }

  CorrespondenceReport report;
  report.fiber_count = fibers.size();
  for (std::size_t i = 0; i < fibers.size(); ++i) {
    const double dev = std::abs(chain_weights[i] / total_chain_weight - fibers[i].abl_weight);
    report.max_deviation = std::max(report.max_deviation, dev);
  }
  report.pass = report.max_deviation <= tol;
  return report;
}

nlohmann::json bundle_to_json(const HistoryBundle& b,
                              const std::vector<MeasurementFiber>& fibers) {
  nlohmann::json j;
  j["grid"] = {{"labels", b.grid.labels}, {"dim", b.grid.dim}};
  j["pre"] = vector_to_json(b.pre);
  if (b.post.has_value()) {
    j["post"] = vector_to_json(*b.post);
  }
  if (!fibers.empty()) {
    j["settings"] = fibers.front().settings;
  }
  nlohmann::json fiber_list = nlohmann::json::array();
  for (const auto& fiber : fibers) {
    nlohmann::json outcome = nlohmann::json::array();
    for (const double v : fiber.outcome_values) outcome.push_back(v);
    fiber_list.push_back({{"outcome", std::move(outcome)},
                          {"weight", fiber.abl_weight},
                          {"inconsistent", fiber.annihilated},
                          {"history", to_json(fiber.history)}});
  }
  j["fibers"] = std::move(fiber_list);
  return j;
}

std::string bundle_to_dot(const HistoryBundle& b, const std::vector<MeasurementFiber>& fibers) {
  const std::size_t n = b.grid.size();
  std::ostringstream out;
  out << "digraph history_bundle {\n";
  out << "  rankdir=LR;\n";
  out << "  t0_pre [label=\"" << b.grid.labels.front() << " pre\"];\n";

  // Interior nodes: one per (time, branch) actually used by some fiber.
  for (std::size_t t = 1; t + 1 < n; ++t) {
    std::size_t branch_count = 0;
    for (const auto& fiber : fibers) {
      branch_count = std::max(branch_count, fiber.outcome_indices[t - 1] + 1);
    }
    for (std::size_t branch = 0; branch < branch_count; ++branch) {
      double value = 0.0;
      for (const auto& fiber : fibers) {
        if (fiber.outcome_indices[t - 1] == branch) {
          value = fiber.outcome_values[t - 1];
          break;
        }
      }
      out << "  " << node_name(t, n, branch) << " [label=\"" << b.grid.labels[t] << " "
          << format_weight(value) << "\"];\n";
    }
  }
  out << "  t" << (n - 1) << "_post [label=\"" << b.grid.labels.back() << " post\"];\n";

  for (const auto& fiber : fibers) {
    std::string attrs = " [label=\"" + format_weight(fiber.abl_weight) + "\"";
    if (fiber.annihilated) {
      attrs += ", style=dashed, inconsistent=true";
    }
    attrs += "];";
    std::vector<std::string> path;
    path.push_back(node_name(0, n, 0));
    for (std::size_t slot = 0; slot < fiber.outcome_indices.size(); ++slot) {
      path.push_back(node_name(slot + 1, n, fiber.outcome_indices[slot]));
    }
    path.push_back(node_name(n - 1, n, 0));
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      out << "  " << path[i] << " -> " << path[i + 1] << attrs << "\n";
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace qtc
