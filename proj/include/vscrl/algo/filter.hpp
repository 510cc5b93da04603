#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "vscrl/algo/networks.hpp"

namespace vscrl::algo {

using InstructionValueFn = std::function<double(const Observation&, const Goal&)>;

// Margin rule: keep a trajectory iff success - v(s0, g) > threshold, and
// always keep successful ones.
inline std::vector<std::shared_ptr<const Trajectory>> instruction_filter(
    const std::vector<std::shared_ptr<const Trajectory>>& trajectories, const Goal& goal,
    const InstructionValueFn& inst_value, double threshold) {
  std::vector<std::shared_ptr<const Trajectory>> kept;
  for (const auto& t : trajectories) {
    if (t->steps.empty()) continue;
    const double success = t->success ? 1.0 : 0.0;
    if (t->success || success - inst_value(t->steps.front().obs, goal) > threshold) {
      kept.push_back(t);
    }
  }
  return kept;
}

inline std::vector<std::shared_ptr<const Trajectory>> instruction_filter(
    const std::vector<std::shared_ptr<const Trajectory>>& trajectories, const Goal& goal,
    const InstructionValueNet& inst_value, double threshold) {
  return instruction_filter(
      trajectories, goal,
      [&inst_value](const Observation& s0, const Goal& g) { return inst_value.value(s0, g); },
      threshold);
}

}  // namespace vscrl::algo
