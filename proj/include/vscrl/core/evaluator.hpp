#pragma once

#include <functional>
#include <utility>

#include "vscrl/core/types.hpp"

namespace vscrl {

// Decides whether a subgoal was completed by a given transition. A resolver
// maps each subgoal to its predicate; subgoals it cannot interpret resolve to
// an empty predicate. The judge only ever answers yes or no, which is what a
// language-model evaluator would return as well.
class SubgoalEvaluator {
 public:
  using Predicate = std::function<bool(const Transition&)>;
  using Resolver = std::function<Predicate(const Subgoal&)>;

  SubgoalEvaluator() = default;
  explicit SubgoalEvaluator(Resolver resolver) : resolver_(std::move(resolver)) {}

  // Same predicate for every subgoal.
  static SubgoalEvaluator uniform(Predicate p) {
    return SubgoalEvaluator([p = std::move(p)](const Subgoal&) { return p; });
  }

  bool covers(const Subgoal& sg) const {
    return resolver_ && static_cast<bool>(resolver_(sg));
  }

  Predicate predicate(const Subgoal& sg) const {
    Predicate p = resolver_ ? resolver_(sg) : Predicate{};
    if (!p) throw Error("undefined-subgoal", sg.text);
    return p;
  }

  bool fires(const Subgoal& sg, const Transition& t) const { return predicate(sg)(t); }

 private:
  Resolver resolver_;
};

}  // namespace vscrl
