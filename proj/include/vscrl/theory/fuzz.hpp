#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "vscrl/nn/mlp.hpp"
#include "vscrl/theory/propositions.hpp"

namespace vscrl::theory {

struct FuzzLimits {
  int max_states = 4;
  int max_actions = 3;
  int max_horizon = 4;
};

// One random (MDP, pi, pi_ref, goal, plan) draw. Goal uses policy row 0 and
// reward column 0; subgoal i uses row i and column i.
struct FuzzInstance {
  std::uint64_t seed = 0;
  TabularMDP mdp;
  PolicyTable policy;
  PolicyTable ref;
  Goal goal;
  TabularCondition goal_condition;
  TabularPlan plan;
};

enum class PlanKind {
  additive,     // segment rewards agree with the goal reward wherever it matters
  arbitrary,    // segment rewards drawn independently
  adversarial,  // additive, then one reachable segment reward flipped
  identity,     // N = 1, the goal itself
};

namespace detail {

inline int draw_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline std::vector<double> random_distribution(std::mt19937_64& rng, int n, double zero_prob) {
  std::vector<double> w(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (auto& x : w) {
    x = nn::unit_uniform(rng) < zero_prob ? 0.0 : 0.05 + nn::unit_uniform(rng);
    sum += x;
  }
  if (sum == 0.0) {
    w[static_cast<std::size_t>(draw_int(rng, 0, n - 1))] = 1.0;
    sum = 1.0;
  }
  for (auto& x : w) x /= sum;
  return w;
}

// Softmax rows with logits uniform in [-2, 2]: strictly positive.
inline PolicyTable random_softmax_policy(std::mt19937_64& rng, int n_conditions, int n_states,
                                         int n_actions) {
  PolicyTable t = PolicyTable::uniform(n_conditions, n_states, n_actions);
  for (int c = 0; c < n_conditions; ++c) {
    for (int s = 0; s < n_states; ++s) {
      std::vector<double> logits(static_cast<std::size_t>(n_actions));
      double m = -1e300;
      for (auto& l : logits) {
        l = -2.0 + 4.0 * nn::unit_uniform(rng);
        m = std::max(m, l);
      }
      double z = 0.0;
      for (auto& l : logits) z += std::exp(l - m);
      for (int a = 0; a < n_actions; ++a) {
        t(c, s, a) = std::exp(logits[static_cast<std::size_t>(a)] - m) / z;
      }
    }
  }
  return t;
}

}  // namespace detail

// States that pi can occupy at some time inside [t_begin, t_end).
inline std::vector<bool> reachable_in_window(const TabularMDP& mdp, const PolicyTable& policy,
                                             const TabularPlan& plan, int t_begin, int t_end) {
  std::vector<bool> out(static_cast<std::size_t>(mdp.n_states), false);
  const auto rows = [&plan](int t) { return plan.row_at(t); };
  for (int t = t_begin; t < t_end; ++t) {
    const auto mu = envs::state_marginal(mdp, policy, rows, t);
    for (int s = 0; s < mdp.n_states; ++s) {
      if (mu[static_cast<std::size_t>(s)] > 0.0) out[static_cast<std::size_t>(s)] = true;
    }
  }
  return out;
}

inline FuzzInstance random_instance(std::uint64_t seed, PlanKind kind, FuzzLimits lim = {}) {
  std::mt19937_64 rng(seed);
  using detail::draw_int;
  FuzzInstance inst;
  inst.seed = seed;
  const int n_states = draw_int(rng, 2, lim.max_states);
  const int n_actions = draw_int(rng, 2, lim.max_actions);
  const int horizon = draw_int(rng, 1, lim.max_horizon);
  const int n_sub = kind == PlanKind::identity ? 1 : draw_int(rng, 1, horizon);

  auto& mdp = inst.mdp;
  mdp = TabularMDP::zeros(n_states, n_actions, n_sub + 1, horizon);
  mdp.initial = detail::random_distribution(rng, n_states, 0.3);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      const auto row = detail::random_distribution(rng, n_states, 0.4);
      for (int n = 0; n < n_states; ++n) mdp.P(s, a, n) = row[static_cast<std::size_t>(n)];
      mdp.R(s, a, 0) = static_cast<std::uint8_t>(rng() % 2);
    }
  }

  inst.goal = Goal{"tabular-" + std::to_string(seed), "collect goal reward", horizon, 0};
  inst.goal_condition = {0, 0};
  inst.policy = detail::random_softmax_policy(rng, n_sub + 1, n_states, n_actions);
  inst.ref = detail::random_softmax_policy(rng, 1, n_states, n_actions);

  if (kind == PlanKind::identity) {
    inst.plan = identity_plan(inst.goal, inst.goal_condition, horizon);
    return inst;
  }

  // Random cut points splitting [0, H) into n_sub nonempty windows.
  std::vector<int> cuts;
  for (int t = 1; t < horizon; ++t) cuts.push_back(t);
  std::shuffle(cuts.begin(), cuts.end(), rng);
  cuts.resize(static_cast<std::size_t>(n_sub - 1));
  std::sort(cuts.begin(), cuts.end());
  cuts.insert(cuts.begin(), 0);
  cuts.push_back(horizon);
  for (int i = 0; i < n_sub; ++i) {
    Subgoal sg{inst.goal.id, i + 1, "segment " + std::to_string(i + 1), SubgoalSource::scripted};
    inst.plan.segments.push_back(TabularSegment{
        sg, cuts[static_cast<std::size_t>(i)], cuts[static_cast<std::size_t>(i + 1)], {i + 1, i + 1}});
  }

  for (int i = 0; i < n_sub; ++i) {
    const auto& seg = inst.plan.segments[static_cast<std::size_t>(i)];
    const auto reach = reachable_in_window(mdp, inst.policy, inst.plan, seg.t_begin, seg.t_end);
    for (int s = 0; s < n_states; ++s) {
      for (int a = 0; a < n_actions; ++a) {
        const bool random = kind == PlanKind::arbitrary || !reach[static_cast<std::size_t>(s)];
        mdp.R(s, a, i + 1) = random ? static_cast<std::uint8_t>(rng() % 2) : mdp.R(s, a, 0);
      }
    }
  }
  if (kind == PlanKind::adversarial) {
    const int i = draw_int(rng, 0, n_sub - 1);
    const auto& seg = inst.plan.segments[static_cast<std::size_t>(i)];
    const auto reach = reachable_in_window(mdp, inst.policy, inst.plan, seg.t_begin, seg.t_end);
    int s = draw_int(rng, 0, n_states - 1);
    while (!reach[static_cast<std::size_t>(s)]) s = (s + 1) % n_states;
    const int a = draw_int(rng, 0, n_actions - 1);
    mdp.R(s, a, i + 1) = static_cast<std::uint8_t>(1 - mdp.R(s, a, i + 1));
  }
  return inst;
}

struct VerifyRow {
  std::string suite;
  std::uint64_t seed = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
  std::string note;
};

struct VerifyCounts {
  int prop1 = 100;
  int prop1_guard = 20;
  int prop2 = 1000;
  int prop2_identity = 100;
  std::uint64_t base_seed = 1;
};

// The default fuzz suite behind `vscrl verify`.
inline std::vector<VerifyRow> run_verification(VerifyCounts counts = {}, double alpha = 1.0) {
  std::vector<VerifyRow> rows;
  for (int k = 0; k < counts.prop1; ++k) {
    const std::uint64_t seed = counts.base_seed + static_cast<std::uint64_t>(k);
    const auto inst = random_instance(seed, PlanKind::additive);
    const auto r = check_prop1(inst.mdp, inst.policy, inst.goal_condition, inst.plan, alpha);
    rows.push_back({"prop1", seed, r.lhs, r.rhs, r.pass, ""});
  }
  for (int k = 0; k < counts.prop1_guard; ++k) {
    const std::uint64_t seed = counts.base_seed + 100000 + static_cast<std::uint64_t>(k);
    const auto inst = random_instance(seed, PlanKind::adversarial);
    VerifyRow row{"prop1-guard", seed, 0.0, 0.0, false, "premise accepted"};
    try {
      check_prop1(inst.mdp, inst.policy, inst.goal_condition, inst.plan, alpha);
    } catch (const Error& e) {
      row.pass = e.code() == "additivity-premise-failed";
      row.note = e.what();
    }
    rows.push_back(row);
  }
  for (int k = 0; k < counts.prop2; ++k) {
    const std::uint64_t seed = counts.base_seed + 200000 + static_cast<std::uint64_t>(k);
    const auto inst = random_instance(seed, PlanKind::arbitrary);
    const auto r = check_prop2(inst.mdp, inst.policy, inst.ref, inst.goal_condition, inst.plan);
    rows.push_back({"prop2", seed, r.lhs, r.rhs, r.pass, ""});
  }
  for (int k = 0; k < counts.prop2_identity; ++k) {
    const std::uint64_t seed = counts.base_seed + 300000 + static_cast<std::uint64_t>(k);
    const auto inst = random_instance(seed, PlanKind::identity);
    const auto r = check_prop2(inst.mdp, inst.policy, inst.ref, inst.goal_condition, inst.plan);
    rows.push_back({"prop2-identity", seed, r.lhs, r.rhs, r.lhs == r.rhs, ""});
  }
  return rows;
}

}  // namespace vscrl::theory
