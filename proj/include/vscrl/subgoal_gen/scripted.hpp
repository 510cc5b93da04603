#pragma once

#include "vscrl/envs/env_kind.hpp"
#include "vscrl/envs/evaluator.hpp"
#include "vscrl/subgoal_gen/plan.hpp"

namespace vscrl::subgoal_gen {

// MultiRoom-Nk: open doors 1..k-1 in order, then reach the goal square.
// Tabular tasks get the identity plan.
inline SubgoalPlan generate_scripted(const Goal& goal, envs::EnvKind kind) {
  if (kind == envs::EnvKind::tabular) return identity_plan(goal);
  const int k = envs::rooms_of(kind);
  std::vector<std::string> texts;
  for (int d = 1; d < k; ++d) texts.push_back("open door " + std::to_string(d));
  texts.push_back(envs::kReachGoalText);
  return make_plan(goal, texts, SubgoalSource::scripted, "scripted");
}

inline SubgoalPlan generate_scripted(const Goal& goal, const std::string& env_kind) {
  envs::EnvKind kind;
  try {
    kind = envs::parse_env_kind(env_kind);
  } catch (const Error&) {
    throw Error("no-script", env_kind);
  }
  return generate_scripted(goal, kind);
}

}  // namespace vscrl::subgoal_gen
