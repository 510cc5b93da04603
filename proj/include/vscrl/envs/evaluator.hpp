#pragma once

#include <regex>
#include <string>

#include "vscrl/core/evaluator.hpp"
#include "vscrl/envs/multiroom.hpp"

namespace vscrl::envs {

inline const std::string kReachGoalText = "reach the goal square";

inline SubgoalEvaluator::Predicate goal_reached() {
  return [](const Transition& t) { return t.reward == 1.0; };
}

// Programmatic judge for MultiRoom subgoals, bound to the door positions of
// the current layout:
//   "open door k"           fires on the transition that opens door k
//   "reach the goal square" fires on arrival at the goal cell
// Identity subgoals (the goal itself) fire on task success.
inline SubgoalEvaluator scripted_evaluator(const GridMultiRoom& env) {
  struct DoorFeatures {
    std::size_t closed;
    std::size_t open;
  };
  std::vector<DoorFeatures> doors;
  for (auto [r, c] : env.doors()) {
    doors.push_back({env.cell_feature(r, c, static_cast<int>(Cell::door_closed)),
                     env.cell_feature(r, c, static_cast<int>(Cell::door_open))});
  }
  return SubgoalEvaluator([doors](const Subgoal& sg) -> SubgoalEvaluator::Predicate {
    if (sg.source == SubgoalSource::identity) return goal_reached();
    static const std::regex door_re(R"(^\s*open\s+(?:the\s+)?door\s+(\d+)\s*\.?\s*$)",
                                    std::regex::icase);
    static const std::regex goal_re(R"(^\s*(?:reach|go to)\s+the\s+goal(?:\s+square)?\s*\.?\s*$)",
                                    std::regex::icase);
    std::smatch m;
    if (std::regex_match(sg.text, m, door_re)) {
      const auto k = std::stoul(m[1].str());
      if (k < 1 || k > doors.size()) return {};
      const DoorFeatures d = doors[k - 1];
      return [d](const Transition& t) {
        return has_feature(t.obs, d.closed) && has_feature(t.next_obs, d.open);
      };
    }
    if (std::regex_match(sg.text, goal_re)) return goal_reached();
    return {};
  });
}

}  // namespace vscrl::envs
