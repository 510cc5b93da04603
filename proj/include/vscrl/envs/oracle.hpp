#pragma once

#include <map>
#include <queue>
#include <tuple>
#include <vector>

#include "vscrl/envs/multiroom.hpp"

namespace vscrl::envs {

// Shortest-path expert: breadth-first search over (pose, opened-doors) from
// the current state, returning the first action of an optimal plan. Ties go
// to the lowest action index, so the oracle is deterministic.
inline int oracle_action(const GridMultiRoom& env) {
  const auto& doors = env.doors();
  std::uint32_t mask0 = 0;
  for (std::size_t k = 0; k < doors.size(); ++k) {
    if (env.cell(doors[k].first, doors[k].second) == Cell::door_open) mask0 |= 1u << k;
  }
  auto door_at = [&](int r, int c) -> int {
    for (std::size_t k = 0; k < doors.size(); ++k) {
      if (doors[k] == std::make_pair(r, c)) return static_cast<int>(k);
    }
    return -1;
  };
  using State = std::tuple<int, int, int, std::uint32_t>;
  std::map<State, int> first_action;
  std::queue<State> q;
  const Pose p0 = env.pose();
  State start{p0.row, p0.col, p0.facing, mask0};
  first_action[start] = -1;
  q.push(start);
  while (!q.empty()) {
    auto s = q.front();
    q.pop();
    auto [r, c, f, mask] = s;
    if (std::make_pair(r, c) == env.goal_cell()) return first_action[s];
    for (int a = 0; a < kNumActions; ++a) {
      int nr = r, nc = c, nf = f;
      std::uint32_t nm = mask;
      const int fr = r + kDRow[f], fc = c + kDCol[f];
      const Cell front = env.cell(fr, fc);
      const int dk = door_at(fr, fc);
      const bool front_open = dk >= 0 ? (mask >> dk) & 1u : false;
      if (a == turn_left) {
        nf = (f + 3) % 4;
      } else if (a == turn_right) {
        nf = (f + 1) % 4;
      } else if (a == forward) {
        const bool passable = dk >= 0 ? front_open
                                      : (front == Cell::empty || front == Cell::goal);
        if (!passable) continue;
        nr = fr;
        nc = fc;
      } else {
        if (dk < 0 || front_open) continue;
        nm |= 1u << dk;
      }
      State ns{nr, nc, nf, nm};
      if (first_action.count(ns)) continue;
      first_action[ns] = first_action[s] < 0 ? a : first_action[s];
      q.push(ns);
    }
  }
  throw Error("unsolvable-layout");
}

}  // namespace vscrl::envs
