#pragma once

#include <memory>
#include <set>
#include <vector>

#include "vscrl/core/evaluator.hpp"
#include "vscrl/core/types.hpp"

namespace vscrl {

// Splits a finished trajectory into subgoal-aligned slices. Slice i ends at
// the first step where subgoal i fires. If subgoal i never fires it absorbs
// every remaining step with return 0, and later subgoals get no slice at all.
// Steps left over once every subgoal has fired go to the final slice.
inline std::vector<SubTrajectory> segment(std::shared_ptr<const Trajectory> traj,
                                          std::vector<Subgoal> subgoals,
                                          const SubgoalEvaluator& evaluator) {
  if (!traj || traj->steps.empty()) throw Error("empty-trajectory");
  if (subgoals.empty()) throw Error("malformed-subgoals", "no subgoals");
  std::set<int> seen;
  for (const auto& sg : subgoals) {
    if (!seen.insert(sg.index).second) {
      throw Error("malformed-subgoals", "duplicate index " + std::to_string(sg.index));
    }
  }
  std::sort(subgoals.begin(), subgoals.end(),
            [](const Subgoal& a, const Subgoal& b) { return a.index < b.index; });

  std::vector<SubgoalEvaluator::Predicate> predicates;
  predicates.reserve(subgoals.size());
  for (const auto& sg : subgoals) predicates.push_back(evaluator.predicate(sg));

  const auto& steps = traj->steps;
  std::vector<SubTrajectory> out;
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < subgoals.size() && cursor < steps.size(); ++i) {
    std::size_t t = cursor;
    bool fired = false;
    for (; t < steps.size(); ++t) {
      if (predicates[i](steps[t])) {
        fired = true;
        break;
      }
    }
    std::size_t end = fired ? t + 1 : steps.size();
    out.push_back(SubTrajectory{traj, cursor, end, subgoals[i], fired ? 1.0 : 0.0});
    cursor = end;
    if (!fired) break;
  }
  // Steps after the last subgoal fired stay with its slice, so the slices
  // always cover the whole trajectory.
  out.back().end = steps.size();
  return out;
}

}  // namespace vscrl
