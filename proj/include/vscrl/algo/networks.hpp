#pragma once

#include <random>
#include <string>
#include <utility>

#include "vscrl/core/types.hpp"
#include "vscrl/nn/checkpoint.hpp"
#include "vscrl/nn/mlp.hpp"

namespace vscrl::algo {

using nn::BinaryRows;
using nn::Tensor2;

// Input geometry shared by every network: binary observation features, a
// conditioning one-hot of `cond_slots` entries and, for the value network,
// an action one-hot.
struct NetShape {
  std::size_t obs_dim = 0;
  std::size_t cond_slots = 1;
  std::size_t n_actions = 4;
};

// Subgoal i occupies slot i-1; a goal occupies its task-set slot. With the
// identity plan both land on slot 0 for single-goal tasks.
inline std::size_t slot_of(const Subgoal& sg) { return static_cast<std::size_t>(sg.index - 1); }
inline std::size_t slot_of(const Goal& g) { return g.slot; }

inline std::vector<int> layer_sizes(std::size_t in, const std::vector<int>& hidden, std::size_t out) {
  std::vector<int> sizes{static_cast<int>(in)};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(static_cast<int>(out));
  return sizes;
}

inline int sample_categorical(const Tensor2& logits_row, std::mt19937_64& rng) {
  const double m = logits_row.maxCoeff();
  const auto e = (logits_row.array() - m).exp();
  const double u = nn::unit_uniform(rng) * e.sum();
  double acc = 0.0;
  for (Eigen::Index a = 0; a < e.size(); ++a) {
    acc += e(a);
    if (u < acc) return static_cast<int>(a);
  }
  return static_cast<int>(e.size() - 1);
}

inline int argmax(const Tensor2& row) {
  Eigen::Index best;
  row.row(0).maxCoeff(&best);
  return static_cast<int>(best);
}

// pi(a | s, condition): logits over discrete actions.
class PolicyNet {
 public:
  PolicyNet(NetShape shape, const std::vector<int>& hidden, std::uint64_t seed)
      : shape_(shape),
        net_(layer_sizes(input_dim(), hidden, shape.n_actions), nn::Activation::relu, seed) {
    net_.zero_output_layer();
  }
  PolicyNet(NetShape shape, nn::MlpNet net) : shape_(shape), net_(std::move(net)) {
    if (net_.input_size() != input_dim() || net_.output_size() != shape_.n_actions) {
      throw Error("incompatible-checkpoint", "policy network does not match the task shape");
    }
  }

  std::size_t input_dim() const { return shape_.obs_dim + shape_.cond_slots; }
  const NetShape& shape() const { return shape_; }
  nn::MlpNet& net() { return net_; }
  const nn::MlpNet& net() const { return net_; }

  void add_row(BinaryRows& rows, const Observation& obs, std::size_t slot) const {
    if (slot >= shape_.cond_slots) throw Error("shape-error", "condition slot out of range");
    for (auto f : obs) rows.set(f);
    rows.set(shape_.obs_dim + slot);
    rows.end_row();
  }
  BinaryRows single(const Observation& obs, std::size_t slot) const {
    BinaryRows rows(input_dim());
    add_row(rows, obs, slot);
    return rows;
  }

  Tensor2 logits(const Observation& obs, std::size_t slot) const { return net_.predict(single(obs, slot)); }
  int sample(const Observation& obs, std::size_t slot, std::mt19937_64& rng) const {
    return sample_categorical(logits(obs, slot), rng);
  }
  int greedy(const Observation& obs, std::size_t slot) const { return argmax(logits(obs, slot)); }

 private:
  NetShape shape_;
  nn::MlpNet net_;
};

// Scalar head squashed into (0, 1) by a sigmoid.
class SigmoidHead {
 public:
  SigmoidHead(std::size_t input_dim, const std::vector<int>& hidden, std::uint64_t seed)
      : net_(layer_sizes(input_dim, hidden, 1), nn::Activation::relu, seed) {}

  nn::MlpNet& net() { return net_; }
  const nn::MlpNet& net() const { return net_; }

  Eigen::VectorXd predict(const BinaryRows& rows) const {
    const Tensor2 z = net_.predict(rows);
    Eigen::VectorXd out(z.rows());
    for (Eigen::Index r = 0; r < z.rows(); ++r) out(r) = nn::sigmoid(z(r, 0));
    return out;
  }

 protected:
  nn::MlpNet net_;
};

// V(s, a, sg): predicted binary sub-trajectory return.
class ValueNet : public SigmoidHead {
 public:
  ValueNet(NetShape shape, const std::vector<int>& hidden, std::uint64_t seed)
      : SigmoidHead(shape.obs_dim + shape.n_actions + shape.cond_slots, hidden, seed), shape_(shape) {}

  std::size_t input_dim() const { return shape_.obs_dim + shape_.n_actions + shape_.cond_slots; }

  void add_row(BinaryRows& rows, const Observation& obs, int action, std::size_t slot) const {
    if (slot >= shape_.cond_slots) throw Error("shape-error", "condition slot out of range");
    for (auto f : obs) rows.set(f);
    rows.set(shape_.obs_dim + static_cast<std::size_t>(action));
    rows.set(shape_.obs_dim + shape_.n_actions + slot);
    rows.end_row();
  }

 private:
  NetShape shape_;
};

// Instruction-level value: success prediction from (initial observation, goal).
class InstructionValueNet : public SigmoidHead {
 public:
  InstructionValueNet(NetShape shape, const std::vector<int>& hidden, std::uint64_t seed)
      : SigmoidHead(shape.obs_dim + shape.cond_slots, hidden, seed), shape_(shape) {
    net_.zero_output_layer();
  }

  void add_row(BinaryRows& rows, const Observation& obs, const Goal& goal) const {
    for (auto f : obs) rows.set(f);
    rows.set(shape_.obs_dim + slot_of(goal));
    rows.end_row();
  }
  std::size_t input_dim() const { return shape_.obs_dim + shape_.cond_slots; }

  double value(const Observation& s0, const Goal& goal) const {
    BinaryRows rows(input_dim());
    add_row(rows, s0, goal);
    return predict(rows)(0);
  }

 private:
  NetShape shape_;
};

// Frozen goal-conditioned policy. Only read access is exposed.
class ReferencePolicy {
 public:
  ReferencePolicy(PolicyNet policy, std::string provenance)
      : policy_(std::move(policy)), provenance_(std::move(provenance)) {}

  const PolicyNet& policy() const { return policy_; }
  const std::string& provenance() const { return provenance_; }
  std::uint64_t parameter_hash() const { return nn::parameter_hash(policy_.net()); }

  Tensor2 logits(const BinaryRows& rows) const { return policy_.net().predict(rows); }
  int sample(const Observation& obs, const Goal& goal, std::mt19937_64& rng) const {
    return policy_.sample(obs, slot_of(goal), rng);
  }
  int greedy(const Observation& obs, const Goal& goal) const {
    return policy_.greedy(obs, slot_of(goal));
  }

 private:
  const PolicyNet policy_;
  std::string provenance_;
};

}  // namespace vscrl::algo
