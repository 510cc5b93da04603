#pragma once

#include <string>

#include "vscrl/core/types.hpp"
#include "vscrl/envs/multiroom.hpp"

namespace vscrl::envs {

enum class EnvKind { multiroom_n2, multiroom_n4, multiroom_n6, tabular };

inline EnvKind parse_env_kind(const std::string& s) {
  if (s == "multiroom-n2" || s == "n2") return EnvKind::multiroom_n2;
  if (s == "multiroom-n4" || s == "n4") return EnvKind::multiroom_n4;
  if (s == "multiroom-n6" || s == "n6") return EnvKind::multiroom_n6;
  if (s == "tabular") return EnvKind::tabular;
  throw Error("unknown-env", s);
}

inline std::string to_string(EnvKind k) {
  switch (k) {
    case EnvKind::multiroom_n2: return "multiroom-n2";
    case EnvKind::multiroom_n4: return "multiroom-n4";
    case EnvKind::multiroom_n6: return "multiroom-n6";
    case EnvKind::tabular: return "tabular";
  }
  return "?";
}

inline int rooms_of(EnvKind k) {
  switch (k) {
    case EnvKind::multiroom_n2: return 2;
    case EnvKind::multiroom_n4: return 4;
    case EnvKind::multiroom_n6: return 6;
    case EnvKind::tabular: break;
  }
  throw Error("unknown-env", "not a MultiRoom kind");
}

inline Goal multiroom_goal(int n_rooms, int horizon) {
  return Goal{"multiroom-n" + std::to_string(n_rooms),
              "traverse " + std::to_string(n_rooms) + " rooms and reach the goal square",
              horizon, 0};
}

}  // namespace vscrl::envs
