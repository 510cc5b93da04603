#pragma once

#include <functional>
#include <memory>
#include <random>

#include "vscrl/algo/networks.hpp"
#include "vscrl/core/evaluator.hpp"
#include "vscrl/envs/env_kind.hpp"
#include "vscrl/envs/evaluator.hpp"
#include "vscrl/envs/multiroom.hpp"
#include "vscrl/subgoal_gen/plan.hpp"

namespace vscrl::algo {

// Conditioning one-hot width; plans longer than this are rejected.
inline constexpr std::size_t kCondSlots = 8;

struct TaskSpec {
  envs::EnvKind kind = envs::EnvKind::multiroom_n2;
  envs::MultiRoomConfig env;
  Goal goal;

  NetShape shape() const {
    envs::GridMultiRoom probe(env);
    return NetShape{probe.feature_dim(), kCondSlots, envs::kNumActions};
  }
  envs::GridMultiRoom make_env() const { return envs::GridMultiRoom(env); }
};

inline TaskSpec multiroom_task(envs::EnvKind kind, int horizon = 0) {
  TaskSpec t;
  t.kind = kind;
  t.env = envs::multiroom_config(envs::rooms_of(kind));
  if (horizon > 0) t.env.horizon = horizon;
  t.goal = envs::multiroom_goal(t.env.n_rooms, t.env.horizon);
  return t;
}

inline TaskSpec custom_task(envs::MultiRoomConfig cfg) {
  TaskSpec t;
  t.env = cfg;
  t.goal = envs::multiroom_goal(cfg.n_rooms, cfg.horizon);
  return t;
}

using EvaluatorFactory = std::function<SubgoalEvaluator(const envs::GridMultiRoom&)>;
using PlanProvider = std::function<subgoal_gen::SubgoalPlan(const Goal&)>;
// Chooses an action given the observation and the active conditioning slot.
using ActionChooser = std::function<int(const Observation&, std::size_t slot)>;

inline EvaluatorFactory scripted_evaluator_factory() {
  return [](const envs::GridMultiRoom& env) { return envs::scripted_evaluator(env); };
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t train_episode_seed(std::uint64_t run_seed, std::uint64_t episode) {
  return splitmix64(run_seed * 0x100000001b3ULL + episode);
}
// Evaluation layouts do not depend on the run seed, so every method and seed
// is scored on the same episodes.
inline std::uint64_t eval_episode_seed(std::uint64_t episode) {
  return splitmix64(0xe7a1000000000000ULL + episode);
}

struct Rollout {
  std::shared_ptr<Trajectory> traj;
  SubgoalEvaluator evaluator;
};

// One episode. With a plan the policy is conditioned on the active subgoal,
// which advances on the step after its evaluator fires; without a plan it is
// conditioned on the goal throughout.
inline Rollout run_episode(envs::GridMultiRoom& env, std::uint64_t seed, const Goal& goal,
                           const std::vector<Subgoal>* plan, const EvaluatorFactory& make_evaluator,
                           const ActionChooser& choose) {
  Rollout out;
  out.traj = std::make_shared<Trajectory>();
  out.traj->goal = goal.id;
  Observation obs = env.reset(seed);
  std::vector<SubgoalEvaluator::Predicate> predicates;
  if (plan) {
    if (plan->size() > kCondSlots) throw Error("invalid-plan", "more subgoals than conditioning slots");
    out.evaluator = make_evaluator(env);
    for (const auto& sg : *plan) predicates.push_back(out.evaluator.predicate(sg));
  }
  std::size_t active = 0;
  while (!env.done()) {
    const std::size_t slot = plan ? slot_of((*plan)[std::min(active, plan->size() - 1)]) : slot_of(goal);
    const int action = choose(obs, slot);
    auto res = env.step(action);
    Transition t{std::move(obs), action, res.reward, res.obs, res.done};
    if (plan && active < plan->size() && predicates[active](t)) ++active;
    obs = std::move(res.obs);
    out.traj->steps.push_back(std::move(t));
  }
  out.traj->success = !out.traj->steps.empty() && out.traj->steps.back().reward == 1.0;
  return out;
}

// Exact fraction of greedy episodes that reach the goal.
inline double evaluate_greedy(const PolicyNet& policy, const TaskSpec& task,
                              const std::vector<Subgoal>* plan, const EvaluatorFactory& make_evaluator,
                              int episodes, std::uint64_t first_seed = 0) {
  if (episodes < 1) throw Error("invalid-argument", "episodes must be >= 1");
  envs::GridMultiRoom env = task.make_env();
  int wins = 0;
  for (int e = 0; e < episodes; ++e) {
    auto r = run_episode(env, eval_episode_seed(first_seed + static_cast<std::uint64_t>(e)), task.goal, plan,
                         make_evaluator,
                         [&policy](const Observation& o, std::size_t slot) { return policy.greedy(o, slot); });
    if (r.traj->success) ++wins;
  }
  return static_cast<double>(wins) / episodes;
}

}  // namespace vscrl::algo
