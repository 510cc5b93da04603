#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vscrl/core/types.hpp"

namespace vscrl::subgoal_gen {

struct FewShotExample {
  std::string goal_text;
  std::vector<std::string> subgoals;
};

struct SubgoalRequest {
  Goal goal;
  std::string context;
  std::vector<FewShotExample> examples;
};

struct SubgoalPlan {
  std::vector<Subgoal> subgoals;
  std::string generator;
  bool cached = false;

  std::size_t size() const { return subgoals.size(); }
};

inline SubgoalPlan make_plan(const Goal& goal, const std::vector<std::string>& texts,
                             SubgoalSource source, std::string generator) {
  SubgoalPlan plan;
  plan.generator = std::move(generator);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    plan.subgoals.push_back(Subgoal{goal.id, static_cast<int>(i + 1), texts[i], source});
  }
  return plan;
}

inline SubgoalPlan identity_plan(const Goal& goal) {
  return SubgoalPlan{{identity_subgoal(goal)}, "identity", false};
}

// Structural checks standing in for manual review of generated plans:
// 1 <= N <= horizon, indices 1..N in order, nonempty texts, one parent goal.
inline const SubgoalPlan& validate_plan(const SubgoalPlan& plan, const Goal& goal) {
  if (plan.subgoals.empty()) throw Error("invalid-plan", "empty plan");
  if (static_cast<int>(plan.subgoals.size()) > goal.horizon) {
    throw Error("invalid-plan", "N exceeds horizon");
  }
  for (std::size_t i = 0; i < plan.subgoals.size(); ++i) {
    const Subgoal& sg = plan.subgoals[i];
    if (sg.index != static_cast<int>(i + 1)) throw Error("invalid-plan", "non-contiguous");
    if (sg.text.find_first_not_of(" \t\r\n") == std::string::npos) {
      throw Error("invalid-plan", "empty text");
    }
    if (sg.parent != goal.id) throw Error("invalid-plan", "foreign parent goal");
  }
  return plan;
}

// Ablation: keep every second subgoal counting back from the last one, so the
// final subgoal always survives and N shrinks to ceil(N / 2).
inline SubgoalPlan limited_plan(const SubgoalPlan& plan) {
  SubgoalPlan out;
  out.generator = plan.generator + "+limited";
  const std::size_t n = plan.subgoals.size();
  for (std::size_t i = 0; i < n; ++i) {
    if ((n - 1 - i) % 2 == 0) {
      Subgoal sg = plan.subgoals[i];
      sg.index = static_cast<int>(out.subgoals.size() + 1);
      out.subgoals.push_back(std::move(sg));
    }
  }
  return out;
}

}  // namespace vscrl::subgoal_gen
