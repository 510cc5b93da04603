#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "vscrl/algo/networks.hpp"
#include "vscrl/core/replay_buffer.hpp"

namespace vscrl::algo {

struct LossOutput {
  double loss = 0.0;
  std::vector<double> grads;
  std::vector<double> weights;  // AWR only
  double mean_weight = 0.0;
};

// min(exp((R - V) / beta), w_max). Exactly 1 when R == V.
inline double awr_weight(double ret, double value, double beta, double w_max) {
  return std::min(std::exp((ret - value) / beta), w_max);
}

inline Eigen::ArrayXd awr_weights(const Eigen::ArrayXd& returns, const Eigen::ArrayXd& values,
                                  double beta, double w_max) {
  return ((returns - values) / beta).exp().min(w_max);
}

inline BinaryRows policy_rows(const Batch& batch, const PolicyNet& policy) {
  BinaryRows rows(policy.input_dim());
  for (const auto& s : batch) policy.add_row(rows, s.obs(), slot_of(s.subgoal()));
  return rows;
}

inline Eigen::ArrayXd predicted_values(const Batch& batch, const ValueNet& value) {
  BinaryRows rows(value.input_dim());
  for (const auto& s : batch) value.add_row(rows, s.obs(), s.action(), slot_of(s.subgoal()));
  return value.predict(rows).array();
}

namespace detail {
// Weighted negative log-likelihood of `actions` under the policy:
//   loss = -(1/n) sum_i w_i log pi(a_i | x_i)
// with gradient -(w_i / n)(onehot(a_i) - softmax_i) on the logits.
inline LossOutput weighted_nll(PolicyNet& policy, const BinaryRows& rows,
                               const std::vector<int>& actions, const Eigen::ArrayXd& w) {
  const Tensor2& logits = policy.net().forward(rows);
  const Tensor2 logp = nn::log_softmax_rows(logits);
  const auto n = static_cast<double>(rows.rows());
  Tensor2 dlogits = logp.array().exp().matrix();
  LossOutput out;
  for (Eigen::Index i = 0; i < logp.rows(); ++i) {
    const auto a = static_cast<Eigen::Index>(actions[static_cast<std::size_t>(i)]);
    out.loss -= w(i) * logp(i, a);
    dlogits(i, a) -= 1.0;
    dlogits.row(i) *= w(i) / n;
  }
  out.loss /= n;
  out.grads = policy.net().backward(dlogits);
  return out;
}
}  // namespace detail

// Advantage-weighted regression on replayed (s, a, sg_i, R_i):
//   loss = -mean[ log pi(a | s, sg_i) * min(exp(A / beta), w_max) ],
//   A = R_i - V(s, a, sg_i), weights held constant.
inline LossOutput awr_policy_loss(const Batch& batch, PolicyNet& policy, const ValueNet& value,
                                  double beta, double w_max) {
  if (!(beta > 0.0)) throw Error("invalid-argument", "beta must be positive");
  Eigen::ArrayXd returns(static_cast<Eigen::Index>(batch.size()));
  std::vector<int> actions;
  actions.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    returns(static_cast<Eigen::Index>(i)) = batch[i].return_bit();
    actions.push_back(batch[i].action());
  }
  const Eigen::ArrayXd w = awr_weights(returns, predicted_values(batch, value), beta, w_max);
  if (!w.allFinite()) throw Error("nan-gradient", "non-finite AWR weight");
  LossOutput out = detail::weighted_nll(policy, policy_rows(batch, policy), actions, w);
  out.weights.assign(w.data(), w.data() + w.size());
  out.mean_weight = w.mean();
  return out;
}

// Squared error between V(s, a, sg_i) and the binary return R_i.
inline LossOutput value_loss(const Batch& batch, ValueNet& value) {
  BinaryRows rows(value.input_dim());
  for (const auto& s : batch) value.add_row(rows, s.obs(), s.action(), slot_of(s.subgoal()));
  const Tensor2& z = value.net().forward(rows);
  const auto n = static_cast<double>(batch.size());
  Tensor2 dz(z.rows(), 1);
  LossOutput out;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double v = nn::sigmoid(z(i, 0));
    const double err = v - batch[static_cast<std::size_t>(i)].return_bit();
    out.loss += err * err;
    dz(i, 0) = 2.0 * err * v * (1.0 - v) / n;
  }
  out.loss /= n;
  out.grads = value.net().backward(dz);
  return out;
}

// a_ref ~ pi_ref(. | s, g) for every sample, in batch order.
inline std::vector<int> sample_reference_actions(const Batch& batch, const ReferencePolicy& ref,
                                                 std::mt19937_64& rng) {
  const PolicyNet& rp = ref.policy();
  BinaryRows rows(rp.input_dim());
  for (const auto& s : batch) rp.add_row(rows, s.obs(), slot_of(s.goal()));
  const Tensor2 logits = ref.logits(rows);
  std::vector<int> out;
  out.reserve(batch.size());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    out.push_back(sample_categorical(logits.row(i), rng));
  }
  return out;
}

// -mean log pi(a_ref | s, sg_i) for given reference actions.
inline LossOutput imitation_loss(const Batch& batch, const std::vector<int>& ref_actions,
                                 PolicyNet& policy) {
  if (ref_actions.size() != batch.size()) throw Error("shape-error", "one reference action per sample");
  const Eigen::ArrayXd ones = Eigen::ArrayXd::Ones(static_cast<Eigen::Index>(batch.size()));
  return detail::weighted_nll(policy, policy_rows(batch, policy), ref_actions, ones);
}

inline LossOutput imitation_loss(const Batch& batch, PolicyNet& policy, const ReferencePolicy& ref,
                                 std::mt19937_64& rng) {
  return imitation_loss(batch, sample_reference_actions(batch, ref, rng), policy);
}

}  // namespace vscrl::algo
