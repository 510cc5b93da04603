#pragma once

#include <cmath>
#include <sstream>

#include "vscrl/theory/elbo.hpp"

namespace vscrl::theory {

struct PropositionCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

inline constexpr double kPropositionTolerance = 1e-9;

inline std::string describe(const TabularTrajectory& t) {
  std::ostringstream os;
  os << "s=" << t.states[0];
  for (std::size_t k = 0; k < t.actions.size(); ++k) {
    os << " a=" << t.actions[k] << " s=" << t.states[k + 1];
  }
  return os.str();
}

// Goal return versus the summed subgoal returns. The premise (goal return of
// every trajectory equals the sum of its segment returns) is checked on the
// full support first. The left side comes from whole trajectories, the right
// side from separately enumerated segment distributions.
inline PropositionCheck check_prop1(const TabularMDP& mdp, const PolicyTable& policy,
                                    TabularCondition goal, const TabularPlan& plan,
                                    double alpha) {
  plan.validate(mdp.horizon);
  const auto plan_rows = [&plan](int t) { return plan.row_at(t); };
  const auto support = envs::enumerate_window(mdp, mdp.initial, 0, mdp.horizon, policy, plan_rows);
  PropositionCheck out;
  for (const auto& w : support) {
    const auto& tr = w.trajectory;
    int goal_total = 0, split_total = 0;
    for (std::size_t k = 0; k < tr.actions.size(); ++k) {
      goal_total += mdp.R(tr.states[k], tr.actions[k], goal.reward_column);
    }
    for (const auto& seg : plan.segments) {
      for (int t = seg.t_begin; t < seg.t_end; ++t) {
        split_total += mdp.R(tr.states[static_cast<std::size_t>(t)],
                             tr.actions[static_cast<std::size_t>(t)], seg.condition.reward_column);
      }
    }
    if (goal_total != split_total) throw Error("additivity-premise-failed", describe(tr));
    out.lhs += w.probability * log_optimality(mdp, tr, goal.reward_column, alpha);
  }
  // The reference plays no part in the return terms.
  for (std::size_t i = 0; i < plan.size(); ++i) {
    out.rhs += detail::plan_segment_terms(mdp, policy, policy, plan, i, goal, alpha).return_term;
  }
  out.pass = std::abs(out.lhs - out.rhs) <= kPropositionTolerance;
  return out;
}

// Trajectory KL to the reference versus the sum of per-subgoal KLs.
inline PropositionCheck check_prop2(const TabularMDP& mdp, const PolicyTable& policy,
                                    const PolicyTable& ref, TabularCondition goal,
                                    const TabularPlan& plan) {
  plan.validate(mdp.horizon);
  const auto plan_rows = [&plan](int t) { return plan.row_at(t); };
  const auto goal_rows = [row = goal.policy_row](int) { return row; };
  const auto whole = window_terms(mdp, policy, ref, mdp.initial, mdp.initial, 0, mdp.horizon,
                                  plan_rows, goal_rows, goal.reward_column, 1.0);
  if (!whole.kl_finite) throw Error("kl-infinite", "goal-level KL");
  PropositionCheck out;
  out.lhs = whole.kl;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto t = detail::plan_segment_terms(mdp, policy, ref, plan, i, goal, 1.0);
    if (!t.kl_finite) throw Error("kl-infinite", "segment " + std::to_string(i + 1));
    out.rhs += t.kl;
  }
  out.pass = out.lhs <= out.rhs + kPropositionTolerance;
  return out;
}

}  // namespace vscrl::theory
