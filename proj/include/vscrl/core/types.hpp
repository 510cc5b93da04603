#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "vscrl/error.hpp"

namespace vscrl {

struct Goal {
  std::string id;
  std::string text;
  int horizon = 1;
  // Position of the goal inside its task set; selects the goal one-hot slot.
  std::size_t slot = 0;
};

enum class SubgoalSource { scripted, remote, identity };

inline const char* to_string(SubgoalSource s) {
  switch (s) {
    case SubgoalSource::scripted: return "scripted";
    case SubgoalSource::remote: return "remote";
    case SubgoalSource::identity: return "identity";
  }
  return "?";
}

struct Subgoal {
  std::string parent;  // Goal::id
  int index = 1;       // 1-based position inside the plan
  std::string text;
  SubgoalSource source = SubgoalSource::scripted;

  bool operator==(const Subgoal&) const = default;
};

// The identity decomposition: a single subgoal that is the goal itself.
inline Subgoal identity_subgoal(const Goal& goal) {
  return Subgoal{goal.id, 1, goal.text, SubgoalSource::identity};
}

// Observations are binary feature vectors stored as the sorted list of active
// indices. Dense expansion happens only when a network consumes them.
using Observation = std::vector<std::uint16_t>;

inline bool has_feature(const Observation& obs, std::size_t feature) {
  return std::binary_search(obs.begin(), obs.end(),
                            static_cast<std::uint16_t>(feature));
}

struct Transition {
  Observation obs;
  int action = 0;
  double reward = 0.0;  // sparse binary reward, 0 or 1
  Observation next_obs;
  bool done = false;
};

struct Trajectory {
  std::string goal;
  std::vector<Transition> steps;
  bool success = false;
};

inline void check_transition(const Transition& t, int n_actions) {
  if (t.reward != 0.0 && t.reward != 1.0) {
    throw Error("invalid-transition", "reward must be 0 or 1");
  }
  if (t.action < 0 || t.action >= n_actions) {
    throw Error("invalid-transition", "action out of range");
  }
}

// A contiguous slice [begin, end) of a shared parent trajectory.
struct SubTrajectory {
  std::shared_ptr<const Trajectory> parent;
  std::size_t begin = 0;
  std::size_t end = 0;
  Subgoal subgoal;
  double return_bit = 0.0;

  std::span<const Transition> steps() const {
    return std::span<const Transition>(parent->steps).subspan(begin, end - begin);
  }
  std::size_t size() const { return end - begin; }
};

}  // namespace vscrl
