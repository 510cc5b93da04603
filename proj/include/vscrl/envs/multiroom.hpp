#pragma once

#include <array>
#include <cstdint>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vscrl/core/types.hpp"

namespace vscrl::envs {

enum class Cell : std::uint8_t { empty = 0, wall = 1, door_closed = 2, door_open = 3, goal = 4 };
inline constexpr int kCellTypes = 5;
// Per-cell features: cell-type one-hot followed by an agent-here flag.
inline constexpr int kCellFeatures = kCellTypes + 1;

enum Action : int { turn_left = 0, turn_right = 1, forward = 2, open_door = 3 };
inline constexpr int kNumActions = 4;

// Facing: 0 east, 1 south, 2 west, 3 north.
inline constexpr std::array<int, 4> kDRow{0, 1, 0, -1};
inline constexpr std::array<int, 4> kDCol{1, 0, -1, 0};

struct Pose {
  int row = 0;
  int col = 0;
  int facing = 0;
  bool operator==(const Pose&) const = default;
};

struct MultiRoomConfig {
  int n_rooms = 2;
  int room_width = 3;   // interior cells per room
  int room_height = 3;
  int horizon = 40;
};

// Standard step budgets for the named MultiRoom sizes.
inline int default_horizon(int n_rooms) {
  switch (n_rooms) {
    case 2: return 40;
    case 4: return 80;
    case 6: return 120;
    default: return 20 * n_rooms;
  }
}

inline MultiRoomConfig multiroom_config(int n_rooms) {
  MultiRoomConfig cfg;
  cfg.n_rooms = n_rooms;
  cfg.horizon = default_horizon(n_rooms);
  return cfg;
}

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool done = false;
};

// A chain of rooms laid out west to east. Consecutive rooms share a wall with
// one closed door at a seed-dependent row; the agent starts in the first room
// and the goal square sits in the last one.
class GridMultiRoom {
 public:
  explicit GridMultiRoom(MultiRoomConfig cfg) : cfg_(cfg) {
    if (cfg_.n_rooms < 1 || cfg_.room_width < 1 || cfg_.room_height < 1) {
      throw Error("invalid-env", "room counts and sizes must be positive");
    }
    if (cfg_.horizon < 1) throw Error("invalid-env", "horizon must be positive");
    if (cfg_.n_rooms == 1 && cfg_.room_width * cfg_.room_height < 2) {
      throw Error("invalid-env", "a single room needs at least two cells");
    }
    width_ = cfg_.n_rooms * (cfg_.room_width + 1) + 1;
    height_ = cfg_.room_height + 2;
    cells_.assign(static_cast<std::size_t>(width_ * height_), Cell::wall);
  }

  const MultiRoomConfig& config() const { return cfg_; }
  int width() const { return width_; }
  int height() const { return height_; }
  int horizon() const { return cfg_.horizon; }
  int n_rooms() const { return cfg_.n_rooms; }
  int step_count() const { return step_count_; }
  bool done() const { return done_; }
  const Pose& pose() const { return pose_; }
  // Door k (1-based) separates room k from room k+1.
  const std::vector<std::pair<int, int>>& doors() const { return doors_; }
  std::pair<int, int> goal_cell() const { return goal_; }
  std::uint64_t seed() const { return seed_; }

  std::size_t feature_dim() const {
    return static_cast<std::size_t>(width_ * height_ * kCellFeatures + 4);
  }
  std::size_t cell_feature(int row, int col, int feature) const {
    return static_cast<std::size_t>((row * width_ + col) * kCellFeatures + feature);
  }

  Cell cell(int row, int col) const { return cells_[index(row, col)]; }

  Observation reset(std::uint64_t seed) {
    seed_ = seed;
    std::mt19937_64 rng(seed);
    do {
      generate(rng);
    } while (!solvable());
    step_count_ = 0;
    done_ = false;
    return observe();
  }

  StepResult step(int action) {
    if (done_) throw Error("episode-finished");
    if (action < 0 || action >= kNumActions) throw Error("invalid-action");
    double reward = 0.0;
    const int fr = pose_.row + kDRow[pose_.facing];
    const int fc = pose_.col + kDCol[pose_.facing];
    switch (action) {
      case turn_left: pose_.facing = (pose_.facing + 3) % 4; break;
      case turn_right: pose_.facing = (pose_.facing + 1) % 4; break;
      case forward:
        if (walkable(cell(fr, fc))) {
          pose_.row = fr;
          pose_.col = fc;
          if (cell(fr, fc) == Cell::goal) reward = 1.0;
        }
        break;
      case open_door:
        if (cell(fr, fc) == Cell::door_closed) cells_[index(fr, fc)] = Cell::door_open;
        break;
    }
    ++step_count_;
    done_ = reward == 1.0 || step_count_ >= cfg_.horizon;
    return StepResult{observe(), reward, done_};
  }

  Observation observe() const {
    Observation obs;
    obs.reserve(static_cast<std::size_t>(width_ * height_ + 2));
    for (int r = 0; r < height_; ++r) {
      for (int c = 0; c < width_; ++c) {
        obs.push_back(static_cast<std::uint16_t>(
            cell_feature(r, c, static_cast<int>(cell(r, c)))));
        if (r == pose_.row && c == pose_.col) {
          obs.push_back(static_cast<std::uint16_t>(cell_feature(r, c, kCellTypes)));
        }
      }
    }
    obs.push_back(static_cast<std::uint16_t>(width_ * height_ * kCellFeatures + pose_.facing));
    return obs;
  }

  // Test hooks for building specific situations.
  void set_pose(Pose p) {
    if (!walkable(cell(p.row, p.col))) throw Error("invalid-pose");
    pose_ = p;
  }
  void set_cell(int row, int col, Cell c) { cells_[index(row, col)] = c; }

  // Breadth-first search over cells, treating doors as passable.
  bool solvable() const {
    std::vector<char> seen(cells_.size(), 0);
    std::queue<std::pair<int, int>> q;
    q.push({pose_.row, pose_.col});
    seen[index(pose_.row, pose_.col)] = 1;
    while (!q.empty()) {
      auto [r, c] = q.front();
      q.pop();
      if (std::make_pair(r, c) == goal_) return true;
      for (int d = 0; d < 4; ++d) {
        const int nr = r + kDRow[d], nc = c + kDCol[d];
        if (nr < 0 || nc < 0 || nr >= height_ || nc >= width_) continue;
        if (cell(nr, nc) == Cell::wall || seen[index(nr, nc)]) continue;
        seen[index(nr, nc)] = 1;
        q.push({nr, nc});
      }
    }
    return false;
  }

  std::string render() const {
    std::ostringstream os;
    static constexpr std::array<char, 4> arrows{'>', 'v', '<', '^'};
    for (int r = 0; r < height_; ++r) {
      for (int c = 0; c < width_; ++c) {
        if (r == pose_.row && c == pose_.col) {
          os << arrows[static_cast<std::size_t>(pose_.facing)];
          continue;
        }
        switch (cell(r, c)) {
          case Cell::empty: os << '.'; break;
          case Cell::wall: os << '#'; break;
          case Cell::door_closed: os << 'D'; break;
          case Cell::door_open: os << '/'; break;
          case Cell::goal: os << 'G'; break;
        }
      }
      os << '\n';
    }
    return os.str();
  }

 private:
  static bool walkable(Cell c) {
    return c == Cell::empty || c == Cell::door_open || c == Cell::goal;
  }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row * width_ + col);
  }
  static int uniform(std::mt19937_64& rng, int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  void generate(std::mt19937_64& rng) {
    std::fill(cells_.begin(), cells_.end(), Cell::wall);
    const int w = cfg_.room_width, h = cfg_.room_height;
    for (int k = 0; k < cfg_.n_rooms; ++k) {
      const int left = k * (w + 1) + 1;
      for (int r = 1; r <= h; ++r) {
        for (int c = left; c < left + w; ++c) cells_[index(r, c)] = Cell::empty;
      }
    }
    doors_.clear();
    for (int k = 1; k < cfg_.n_rooms; ++k) {
      const int col = k * (w + 1);
      const int row = uniform(rng, 1, h);
      cells_[index(row, col)] = Cell::door_closed;
      doors_.emplace_back(row, col);
    }
    const int first_left = 1;
    const int last_left = (cfg_.n_rooms - 1) * (w + 1) + 1;
    pose_.row = uniform(rng, 1, h);
    pose_.col = uniform(rng, first_left, first_left + w - 1);
    pose_.facing = uniform(rng, 0, 3);
    do {
      goal_ = {uniform(rng, 1, h), uniform(rng, last_left, last_left + w - 1)};
    } while (goal_ == std::make_pair(pose_.row, pose_.col));
    cells_[index(goal_.first, goal_.second)] = Cell::goal;
  }

  MultiRoomConfig cfg_;
  int width_ = 0;
  int height_ = 0;
  std::vector<Cell> cells_;
  std::vector<std::pair<int, int>> doors_;
  std::pair<int, int> goal_{0, 0};
  Pose pose_;
  int step_count_ = 0;
  bool done_ = true;
  std::uint64_t seed_ = 0;
};

}  // namespace vscrl::envs
