#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "vscrl/error.hpp"

namespace vscrl::envs {

// Explicit finite-horizon MDP small enough that every trajectory can be
// listed. Rewards are binary and indexed by reward column, so one table can
// hold a goal's reward and the reward of each of its subgoals.
struct TabularMDP {
  int n_states = 0;
  int n_actions = 0;
  int n_columns = 1;  // reward columns (goals and subgoals)
  int horizon = 1;
  std::vector<double> transition;  // [s][a][s']
  std::vector<double> initial;     // [s]
  std::vector<std::uint8_t> reward;  // [s][a][column]

  double P(int s, int a, int next) const {
    return transition[static_cast<std::size_t>((s * n_actions + a) * n_states + next)];
  }
  double& P(int s, int a, int next) {
    return transition[static_cast<std::size_t>((s * n_actions + a) * n_states + next)];
  }
  int R(int s, int a, int column) const {
    return reward[static_cast<std::size_t>((s * n_actions + a) * n_columns + column)];
  }
  std::uint8_t& R(int s, int a, int column) {
    return reward[static_cast<std::size_t>((s * n_actions + a) * n_columns + column)];
  }

  static TabularMDP zeros(int n_states, int n_actions, int n_columns, int horizon) {
    TabularMDP m;
    m.n_states = n_states;
    m.n_actions = n_actions;
    m.n_columns = n_columns;
    m.horizon = horizon;
    m.transition.assign(static_cast<std::size_t>(n_states * n_actions * n_states), 0.0);
    m.initial.assign(static_cast<std::size_t>(n_states), 0.0);
    m.reward.assign(static_cast<std::size_t>(n_states * n_actions * n_columns), 0);
    return m;
  }

  void validate() const {
    if (n_states < 1 || n_actions < 1 || n_columns < 1 || horizon < 1) {
      throw Error("invalid-mdp", "sizes must be positive");
    }
    auto near_one = [](double x) { return std::abs(x - 1.0) <= 1e-12; };
    double rho = 0.0;
    for (double p : initial) {
      if (p < 0.0) throw Error("invalid-mdp", "negative initial probability");
      rho += p;
    }
    if (!near_one(rho)) throw Error("invalid-mdp", "initial distribution does not sum to 1");
    for (int s = 0; s < n_states; ++s) {
      for (int a = 0; a < n_actions; ++a) {
        double row = 0.0;
        for (int n = 0; n < n_states; ++n) {
          if (P(s, a, n) < 0.0) throw Error("invalid-mdp", "negative transition probability");
          row += P(s, a, n);
        }
        if (!near_one(row)) throw Error("invalid-mdp", "transition row does not sum to 1");
      }
    }
    for (auto r : reward) {
      if (r > 1) throw Error("invalid-mdp", "rewards must be binary");
    }
  }
};

// Conditioned policy table pi[condition][s][a]. Conditions are goal or
// subgoal rows.
struct PolicyTable {
  int n_conditions = 0;
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> probs;

  double operator()(int condition, int s, int a) const {
    return probs[static_cast<std::size_t>((condition * n_states + s) * n_actions + a)];
  }
  double& operator()(int condition, int s, int a) {
    return probs[static_cast<std::size_t>((condition * n_states + s) * n_actions + a)];
  }

  static PolicyTable uniform(int n_conditions, int n_states, int n_actions) {
    PolicyTable t{n_conditions, n_states, n_actions, {}};
    t.probs.assign(static_cast<std::size_t>(n_conditions * n_states * n_actions),
                   1.0 / n_actions);
    return t;
  }

  bool strictly_positive() const {
    for (double p : probs) {
      if (!(p > 0.0)) return false;
    }
    return true;
  }
};

// States s_0..s_T and actions a_0..a_{T-1} over a time window.
struct TabularTrajectory {
  int t_begin = 0;
  std::vector<int> states;
  std::vector<int> actions;

  bool operator==(const TabularTrajectory&) const = default;
};

struct WeightedTrajectory {
  TabularTrajectory trajectory;
  double probability = 0.0;
};

// Which policy row is active at absolute time t.
using ConditionSchedule = std::function<int(int t)>;

inline constexpr double kEnumerationLimit = 1e7;

// Probability of a window trajectory given the entry distribution, with the
// same multiplication order the enumerator uses.
inline double window_probability(const TabularMDP& mdp, const std::vector<double>& entry,
                                 const PolicyTable& policy, const ConditionSchedule& cond,
                                 const TabularTrajectory& traj) {
  double p = entry[static_cast<std::size_t>(traj.states[0])];
  for (std::size_t k = 0; k < traj.actions.size(); ++k) {
    const int t = traj.t_begin + static_cast<int>(k);
    const int s = traj.states[k], a = traj.actions[k], n = traj.states[k + 1];
    p *= policy(cond(t), s, a);
    p *= mdp.P(s, a, n);
  }
  return p;
}

// Lists every nonzero-probability trajectory over [t_begin, t_end) starting
// from `entry`. Order: lexicographic in (s_0, a_0, s_1, a_1, ...).
inline std::vector<WeightedTrajectory> enumerate_window(const TabularMDP& mdp,
                                                        const std::vector<double>& entry,
                                                        int t_begin, int t_end,
                                                        const PolicyTable& policy,
                                                        const ConditionSchedule& cond) {
  if (t_begin < 0 || t_end < t_begin || t_end > mdp.horizon) {
    throw Error("invalid-window");
  }
  const int len = t_end - t_begin;
  const double bound = std::pow(static_cast<double>(mdp.n_states), len + 1) *
                       std::pow(static_cast<double>(mdp.n_actions), len);
  if (bound > kEnumerationLimit) throw Error("enumeration-overflow");

  std::vector<WeightedTrajectory> out;
  TabularTrajectory cur;
  cur.t_begin = t_begin;
  std::function<void(double)> extend = [&](double p) {
    const auto k = cur.actions.size();
    if (static_cast<int>(k) == len) {
      out.push_back({cur, p});
      return;
    }
    const int t = t_begin + static_cast<int>(k);
    const int s = cur.states.back();
    const int c = cond(t);
    for (int a = 0; a < mdp.n_actions; ++a) {
      const double pa = p * policy(c, s, a);
      if (pa == 0.0) continue;
      cur.actions.push_back(a);
      for (int n = 0; n < mdp.n_states; ++n) {
        const double pn = pa * mdp.P(s, a, n);
        if (pn == 0.0) continue;
        cur.states.push_back(n);
        extend(pn);
        cur.states.pop_back();
      }
      cur.actions.pop_back();
    }
  };
  for (int s0 = 0; s0 < mdp.n_states; ++s0) {
    const double p0 = entry[static_cast<std::size_t>(s0)];
    if (p0 == 0.0) continue;
    cur.states.assign(1, s0);
    extend(p0);
  }
  return out;
}

// Full-horizon trajectory distribution under one fixed condition row.
inline std::vector<WeightedTrajectory> enumerate_trajectories(const TabularMDP& mdp,
                                                              const PolicyTable& policy,
                                                              int condition) {
  return enumerate_window(mdp, mdp.initial, 0, mdp.horizon, policy,
                          [condition](int) { return condition; });
}

// State distribution at absolute time t_target when rolling out from rho.
inline std::vector<double> state_marginal(const TabularMDP& mdp, const PolicyTable& policy,
                                          const ConditionSchedule& cond, int t_target) {
  std::vector<double> mu = mdp.initial;
  for (int t = 0; t < t_target; ++t) {
    std::vector<double> next(static_cast<std::size_t>(mdp.n_states), 0.0);
    const int c = cond(t);
    for (int s = 0; s < mdp.n_states; ++s) {
      const double ms = mu[static_cast<std::size_t>(s)];
      if (ms == 0.0) continue;
      for (int a = 0; a < mdp.n_actions; ++a) {
        const double pa = ms * policy(c, s, a);
        if (pa == 0.0) continue;
        for (int n = 0; n < mdp.n_states; ++n) {
          next[static_cast<std::size_t>(n)] += pa * mdp.P(s, a, n);
        }
      }
    }
    mu = std::move(next);
  }
  return mu;
}

}  // namespace vscrl::envs
