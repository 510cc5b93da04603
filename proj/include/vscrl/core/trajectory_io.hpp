#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "vscrl/core/types.hpp"

namespace vscrl {

// Line-delimited trajectory records: one JSON object per transition.
//   {"obs":[...],"action":a,"reward":r,"next_obs":[...],"done":b,
//    "goal_id":"...","subgoal_index":i}
// subgoal_index is 0 when the transition belongs to no sub-trajectory.
inline void write_trajectory(std::ostream& os, const Trajectory& traj,
                             const std::vector<SubTrajectory>& segmentation = {}) {
  std::vector<int> subgoal_of(traj.steps.size(), 0);
  for (const auto& sub : segmentation) {
    for (std::size_t t = sub.begin; t < sub.end && t < subgoal_of.size(); ++t) {
      subgoal_of[t] = sub.subgoal.index;
    }
  }
  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    const Transition& s = traj.steps[t];
    nlohmann::json j;
    j["obs"] = s.obs;
    j["action"] = s.action;
    j["reward"] = s.reward;
    j["next_obs"] = s.next_obs;
    j["done"] = s.done;
    j["goal_id"] = traj.goal;
    j["subgoal_index"] = subgoal_of[t];
    os << j.dump() << '\n';
  }
}

// Reads records until EOF. A record with done=true closes a trajectory; a
// change of goal_id closes one as well.
inline std::vector<Trajectory> read_trajectories(std::istream& is) {
  std::vector<Trajectory> out;
  Trajectory current;
  bool open = false;
  std::string line;
  std::size_t lineno = 0;
  auto close = [&] {
    if (open) {
      current.success = !current.steps.empty() && current.steps.back().reward == 1.0;
      out.push_back(std::move(current));
      current = Trajectory{};
      open = false;
    }
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    Transition s;
    try {
      const auto j = nlohmann::json::parse(line);
      auto goal_id = j.at("goal_id").get<std::string>();
      if (open && goal_id != current.goal) close();
      if (!open) {
        current.goal = goal_id;
        open = true;
      }
      s.obs = j.at("obs").get<Observation>();
      s.action = j.at("action").get<int>();
      s.reward = j.at("reward").get<double>();
      s.next_obs = j.at("next_obs").get<Observation>();
      s.done = j.at("done").get<bool>();
    } catch (const nlohmann::json::exception& e) {
      throw Error("malformed-record", "line " + std::to_string(lineno) + ": " + e.what());
    }
    current.steps.push_back(std::move(s));
    if (current.steps.back().done) close();
  }
  close();
  return out;
}

}  // namespace vscrl
