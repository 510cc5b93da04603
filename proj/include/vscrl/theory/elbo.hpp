#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "vscrl/core/types.hpp"
#include "vscrl/envs/tabular.hpp"

namespace vscrl::theory {

using envs::PolicyTable;
using envs::TabularMDP;
using envs::TabularTrajectory;
using envs::WeightedTrajectory;

// A goal or subgoal on a tabular MDP: the policy row it conditions on and
// the reward column that scores it.
struct TabularCondition {
  int policy_row = 0;
  int reward_column = 0;
};

struct TabularSegment {
  Subgoal subgoal;
  int t_begin = 0;
  int t_end = 0;
  TabularCondition condition;
};

// Subgoals on a tabular MDP: a contiguous split of [0, H) with one
// condition per window.
struct TabularPlan {
  std::vector<TabularSegment> segments;

  std::size_t size() const { return segments.size(); }

  void validate(int horizon) const {
    if (segments.empty()) throw Error("invalid-plan", "empty plan");
    if (static_cast<int>(segments.size()) > horizon) throw Error("invalid-plan", "N exceeds horizon");
    int t = 0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const auto& s = segments[i];
      if (s.subgoal.index != static_cast<int>(i + 1)) throw Error("invalid-plan", "non-contiguous");
      if (s.t_begin != t || s.t_end <= s.t_begin) throw Error("invalid-plan", "segments must tile the horizon");
      t = s.t_end;
    }
    if (t != horizon) throw Error("invalid-plan", "segments must tile the horizon");
  }

  // Policy row active at absolute time t when following the plan.
  int row_at(int t) const {
    for (const auto& s : segments) {
      if (t >= s.t_begin && t < s.t_end) return s.condition.policy_row;
    }
    return segments.back().condition.policy_row;
  }
};

inline TabularPlan identity_plan(const Goal& goal, TabularCondition cond, int horizon) {
  return TabularPlan{{TabularSegment{identity_subgoal(goal), 0, horizon, cond}}};
}

struct TrajectoryDistribution {
  std::vector<WeightedTrajectory> support;
  std::string conditioning;

  double total() const {
    double s = 0.0;
    for (const auto& w : support) s += w.probability;
    return s;
  }
};

struct SegmentReport {
  double return_term = 0.0;
  double kl_term = 0.0;
};

struct ElboReport {
  double return_term = 0.0;
  double kl_term = 0.0;
  double elbo = 0.0;
  bool kl_finite = true;  // false when the reference misses support of pi
  std::vector<SegmentReport> decomposition;
};

// Summed reward of the trajectory under `reward_column`, divided by alpha:
// the log optimality likelihood with its normalising constant dropped.
inline double log_optimality(const TabularMDP& mdp, const TabularTrajectory& traj,
                             int reward_column, double alpha) {
  if (!(alpha > 0.0)) throw Error("invalid-argument", "alpha must be positive");
  int total = 0;
  for (std::size_t k = 0; k < traj.actions.size(); ++k) {
    total += mdp.R(traj.states[k], traj.actions[k], reward_column);
  }
  return static_cast<double>(total) / alpha;
}

struct WindowTerms {
  double return_term = 0.0;
  double kl = 0.0;
  bool kl_finite = true;
};

// Expected log-optimality and KL(p_pi || p_ref) over one time window. The
// two distributions start from their own entry-state laws.
inline WindowTerms window_terms(const TabularMDP& mdp, const PolicyTable& policy,
                                const PolicyTable& ref, const std::vector<double>& entry_pi,
                                const std::vector<double>& entry_ref, int t_begin, int t_end,
                                const envs::ConditionSchedule& pi_rows,
                                const envs::ConditionSchedule& ref_rows, int reward_column,
                                double alpha) {
  WindowTerms out;
  const auto support = envs::enumerate_window(mdp, entry_pi, t_begin, t_end, policy, pi_rows);
  for (const auto& w : support) {
    const double p = w.probability;
    out.return_term += p * log_optimality(mdp, w.trajectory, reward_column, alpha);
    const double q = envs::window_probability(mdp, entry_ref, ref, ref_rows, w.trajectory);
    if (q == 0.0) {
      out.kl_finite = false;
      continue;
    }
    out.kl += p * (std::log(p) - std::log(q));
  }
  if (!out.kl_finite) out.kl = std::numeric_limits<double>::infinity();
  return out;
}

inline TrajectoryDistribution trajectory_distribution(const TabularMDP& mdp,
                                                      const PolicyTable& policy,
                                                      TabularCondition cond,
                                                      std::string tag = "goal") {
  return {envs::enumerate_trajectories(mdp, policy, cond.policy_row), std::move(tag)};
}

// GC-ELBO: E_{p_pi(tau|g)}[log p(O|tau,g)] - KL(p_pi(tau|g) || p_ref(tau|g)).
inline ElboReport gc_elbo(const TabularMDP& mdp, const PolicyTable& policy,
                          const PolicyTable& ref, TabularCondition goal, double alpha) {
  const auto rows = [row = goal.policy_row](int) { return row; };
  const auto terms = window_terms(mdp, policy, ref, mdp.initial, mdp.initial, 0, mdp.horizon,
                                  rows, rows, goal.reward_column, alpha);
  ElboReport r;
  r.return_term = terms.return_term;
  r.kl_term = terms.kl;
  r.kl_finite = terms.kl_finite;
  r.elbo = r.return_term - r.kl_term;
  r.decomposition.push_back({terms.return_term, terms.kl});
  return r;
}

namespace detail {
// Segment i of the plan: pi follows the plan up to the entry time and then
// conditions on sg_i; the reference rolls out goal-conditioned throughout.
inline WindowTerms plan_segment_terms(const TabularMDP& mdp, const PolicyTable& policy,
                                      const PolicyTable& ref, const TabularPlan& plan,
                                      std::size_t i, TabularCondition goal, double alpha) {
  const auto& seg = plan.segments[i];
  const auto plan_rows = [&plan](int t) { return plan.row_at(t); };
  const auto goal_rows = [row = goal.policy_row](int) { return row; };
  const auto seg_rows = [row = seg.condition.policy_row](int) { return row; };
  const auto entry_pi = envs::state_marginal(mdp, policy, plan_rows, seg.t_begin);
  const auto entry_ref = envs::state_marginal(mdp, ref, goal_rows, seg.t_begin);
  return window_terms(mdp, policy, ref, entry_pi, entry_ref, seg.t_begin, seg.t_end, seg_rows,
                      goal_rows, seg.condition.reward_column, alpha);
}
}  // namespace detail

// SGC-ELBO summed over the plan: per-subgoal return and KL terms, each KL
// between pi(.|s, sg_i) and the goal-conditioned reference on window i.
inline ElboReport sgc_elbo(const TabularMDP& mdp, const PolicyTable& policy,
                           const PolicyTable& ref, const TabularPlan& plan,
                           TabularCondition goal, double alpha) {
  plan.validate(mdp.horizon);
  ElboReport r;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto t = detail::plan_segment_terms(mdp, policy, ref, plan, i, goal, alpha);
    r.decomposition.push_back({t.return_term, t.kl});
    r.return_term += t.return_term;
    r.kl_term += t.kl;
    r.kl_finite = r.kl_finite && t.kl_finite;
  }
  r.elbo = r.return_term - r.kl_term;
  return r;
}

}  // namespace vscrl::theory
