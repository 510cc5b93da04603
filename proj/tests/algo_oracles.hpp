#pragma once

// Random batches and per-sample loop reimplementations of the AWR, value and
// imitation losses. Shared by the unit and acceptance tests.

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "gradcheck.hpp"
#include "vscrl/algo/losses.hpp"

namespace vscrl::oracle {

using algo::NetShape;
using algo::PolicyNet;
using algo::ValueNet;
using nn::Tensor2;

inline void randomize(nn::MlpNet& net, std::mt19937_64& rng, double scale = 0.5) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double& p : net.parameters()) p = u(rng);
}

// A buffer of random sub-trajectories and a batch drawn from it. The batch
// points into the buffer, so both travel together.
struct RandomBatch {
  std::unique_ptr<ReplayBuffer> buffer;
  Batch batch;
};

inline Observation random_obs(std::mt19937_64& rng, std::size_t dim) {
  Observation obs;
  for (std::size_t f = 0; f < dim; ++f) {
    if (rng() % 3 == 0) obs.push_back(static_cast<std::uint16_t>(f));
  }
  return obs;
}

inline RandomBatch random_batch(std::mt19937_64& rng, const NetShape& shape, std::size_t n) {
  RandomBatch out{std::make_unique<ReplayBuffer>(64), {}};
  const int n_goals = 2;
  for (int k = 0; k < 12; ++k) {
    auto traj = std::make_shared<Trajectory>();
    const int len = 1 + static_cast<int>(rng() % 6);
    for (int t = 0; t < len; ++t) {
      traj->steps.push_back(Transition{random_obs(rng, shape.obs_dim),
                                       static_cast<int>(rng() % shape.n_actions), 0.0,
                                       random_obs(rng, shape.obs_dim), t == len - 1});
    }
    Goal goal{"g" + std::to_string(k % n_goals), "goal", 8, static_cast<std::size_t>(k % n_goals)};
    traj->goal = goal.id;
    const int index = 1 + static_cast<int>(rng() % shape.cond_slots);
    SubTrajectory sub{traj, 0, traj->steps.size(), Subgoal{goal.id, index, "sg", SubgoalSource::scripted},
                      static_cast<double>(rng() % 2)};
    out.buffer->push(std::move(sub), goal);
  }
  out.batch = out.buffer->sample_batch(n, rng);
  return out;
}

inline Eigen::RowVectorXd dense_row(const Observation& obs, std::size_t dim, std::vector<std::size_t> extra) {
  Eigen::RowVectorXd x = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(dim));
  for (auto f : obs) x(f) = 1.0;
  for (auto e : extra) x(static_cast<Eigen::Index>(e)) = 1.0;
  return x;
}

// Forward pass written as explicit loops over the weights.
inline std::vector<double> loop_forward(const nn::MlpNet& net, const Eigen::RowVectorXd& x) {
  std::vector<double> h(x.data(), x.data() + x.size());
  for (std::size_t l = 0; l < net.layers(); ++l) {
    const auto w = net.weights(l);
    const auto b = net.bias(l);
    std::vector<double> z(static_cast<std::size_t>(w.cols()));
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      double s = b(j);
      for (Eigen::Index k = 0; k < w.rows(); ++k) s += h[static_cast<std::size_t>(k)] * w(k, j);
      if (l + 1 < net.layers()) {
        switch (net.activation()) {
          case nn::Activation::relu: s = s > 0.0 ? s : 0.0; break;
          case nn::Activation::tanh: s = std::tanh(s); break;
          case nn::Activation::identity: break;
        }
      }
      z[static_cast<std::size_t>(j)] = s;
    }
    h = std::move(z);
  }
  return h;
}

inline double loop_log_prob(const PolicyNet& policy, const Observation& obs, std::size_t slot, int action) {
  const NetShape& s = policy.shape();
  const auto logits = loop_forward(policy.net(), dense_row(obs, policy.input_dim(), {s.obs_dim + slot}));
  double m = logits[0];
  for (double v : logits) m = std::max(m, v);
  double z = 0.0;
  for (double v : logits) z += std::exp(v - m);
  return logits[static_cast<std::size_t>(action)] - m - std::log(z);
}

inline double loop_value(const ValueNet& value, const NetShape& s, const Observation& obs, int action,
                         std::size_t slot) {
  const auto out = loop_forward(
      value.net(), dense_row(obs, value.input_dim(),
                             {s.obs_dim + static_cast<std::size_t>(action), s.obs_dim + s.n_actions + slot}));
  return 1.0 / (1.0 + std::exp(-out[0]));
}

// Sample-by-sample versions of the three losses.
inline double loop_awr_loss(const Batch& batch, const PolicyNet& policy, const ValueNet& value, double beta,
                            double w_max, std::vector<double>* weights = nullptr) {
  double total = 0.0;
  for (const auto& s : batch) {
    const std::size_t slot = algo::slot_of(s.subgoal());
    const double v = loop_value(value, policy.shape(), s.obs(), s.action(), slot);
    double w = std::exp((s.return_bit() - v) / beta);
    if (w > w_max) w = w_max;
    if (weights) weights->push_back(w);
    total += -w * loop_log_prob(policy, s.obs(), slot, s.action());
  }
  return total / static_cast<double>(batch.size());
}

inline double loop_value_loss(const Batch& batch, const ValueNet& value, const NetShape& shape) {
  double total = 0.0;
  for (const auto& s : batch) {
    const double v = loop_value(value, shape, s.obs(), s.action(), algo::slot_of(s.subgoal()));
    total += (v - s.return_bit()) * (v - s.return_bit());
  }
  return total / static_cast<double>(batch.size());
}

inline double loop_imitation_loss(const Batch& batch, const std::vector<int>& ref_actions, const PolicyNet& policy) {
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    total -= loop_log_prob(policy, batch[i].obs(), algo::slot_of(batch[i].subgoal()), ref_actions[i]);
  }
  return total / static_cast<double>(batch.size());
}

// Gradient as the mean of single-sample gradients, each computed on its own
// one-row batch.
template <class LossFn>
std::vector<double> per_sample_grad(const Batch& batch, LossFn&& single) {
  std::vector<double> acc;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const std::vector<double> g = single(Batch{batch[i]}, i);
    if (acc.empty()) acc.assign(g.size(), 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) acc[k] += g[k] / static_cast<double>(batch.size());
  }
  return acc;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = a.size() == b.size() ? 0.0 : INFINITY;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

struct OracleGap {
  double loss = 0.0;
  double grad = 0.0;
  double weight = 0.0;
};

// Largest vectorized-vs-loop discrepancy for each loss on one random batch.
inline OracleGap loss_oracle_gap(std::mt19937_64& rng, const NetShape& shape, const std::vector<int>& hidden,
                                 std::size_t n, double beta, double w_max) {
  PolicyNet policy(shape, hidden, rng());
  ValueNet value(shape, hidden, rng());
  randomize(policy.net(), rng);
  randomize(value.net(), rng);
  const RandomBatch rb = random_batch(rng, shape, n);
  const Batch& batch = rb.batch;
  OracleGap gap;

  std::vector<double> w_loop;
  const auto awr = algo::awr_policy_loss(batch, policy, value, beta, w_max);
  gap.loss = std::abs(awr.loss - loop_awr_loss(batch, policy, value, beta, w_max, &w_loop));
  gap.weight = max_abs_diff(awr.weights, w_loop);
  gap.grad = max_abs_diff(awr.grads, per_sample_grad(batch, [&](const Batch& one, std::size_t i) {
                            std::vector<int> a{one[0].action()};
                            const Eigen::ArrayXd w = Eigen::ArrayXd::Constant(1, w_loop[i]);
                            return algo::detail::weighted_nll(policy, algo::policy_rows(one, policy), a, w).grads;
                          }));

  const auto vl = algo::value_loss(batch, value);
  gap.loss = std::max(gap.loss, std::abs(vl.loss - loop_value_loss(batch, value, shape)));
  gap.grad = std::max(gap.grad, max_abs_diff(vl.grads, per_sample_grad(batch, [&](const Batch& one, std::size_t) {
                                               return algo::value_loss(one, value).grads;
                                             })));

  std::vector<int> ref_actions;
  for (std::size_t i = 0; i < batch.size(); ++i) ref_actions.push_back(static_cast<int>(rng() % shape.n_actions));
  const auto im = algo::imitation_loss(batch, ref_actions, policy);
  gap.loss = std::max(gap.loss, std::abs(im.loss - loop_imitation_loss(batch, ref_actions, policy)));
  gap.grad = std::max(gap.grad, max_abs_diff(im.grads, per_sample_grad(batch, [&](const Batch& one, std::size_t i) {
                                               return algo::imitation_loss(one, {ref_actions[i]}, policy).grads;
                                             })));
  return gap;
}

// Central finite differences on every network the trainers use, through the
// loss each one is trained with. Returns the worst relative error.
inline double architecture_gradcheck(std::uint64_t seed, const std::vector<int>& hidden) {
  std::mt19937_64 rng(seed);
  const NetShape shape{14, 3, 4};
  PolicyNet policy(shape, hidden, rng());
  ValueNet value(shape, hidden, rng());
  algo::InstructionValueNet inst(shape, hidden, rng());
  nn::MlpNet critic(algo::layer_sizes(policy.input_dim(), hidden, 1), nn::Activation::tanh, rng());
  randomize(policy.net(), rng);
  randomize(value.net(), rng);
  randomize(inst.net(), rng);
  const RandomBatch rb = random_batch(rng, shape, 16);
  const Batch& batch = rb.batch;
  double worst = 0.0;

  {
    const auto out = algo::awr_policy_loss(batch, policy, value, 0.5, 20.0);
    worst = std::max(worst, finite_difference(policy.net().parameters(), out.grads, [&] {
                       return algo::awr_policy_loss(batch, policy, value, 0.5, 20.0).loss;
                     }).max_rel_error);
  }
  {
    const auto out = algo::value_loss(batch, value);
    worst = std::max(worst, finite_difference(value.net().parameters(), out.grads, [&] {
                       return algo::value_loss(batch, value).loss;
                     }).max_rel_error);
  }
  {
    std::vector<int> acts;
    for (std::size_t i = 0; i < batch.size(); ++i) acts.push_back(static_cast<int>(rng() % shape.n_actions));
    const auto out = algo::imitation_loss(batch, acts, policy);
    worst = std::max(worst, finite_difference(policy.net().parameters(), out.grads, [&] {
                       return algo::imitation_loss(batch, acts, policy).loss;
                     }).max_rel_error);
  }
  {
    // Sigmoid heads on (s0, g) and the tanh critic on (s, g), both under
    // squared error against random targets.
    nn::BinaryRows rows(inst.input_dim());
    std::vector<double> targets;
    for (const auto& s : batch) {
      inst.add_row(rows, s.obs(), s.goal());
      targets.push_back(nn::unit_uniform(rng));
    }
    auto inst_loss = [&] {
      const auto v = inst.predict(rows);
      double l = 0.0;
      for (Eigen::Index i = 0; i < v.size(); ++i) l += std::pow(v(i) - targets[static_cast<std::size_t>(i)], 2);
      return l;
    };
    const Tensor2& z = inst.net().forward(rows);
    Tensor2 dz(z.rows(), 1);
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      const double v = nn::sigmoid(z(i, 0));
      dz(i, 0) = 2.0 * (v - targets[static_cast<std::size_t>(i)]) * v * (1.0 - v);
    }
    const auto g = inst.net().backward(dz);
    worst = std::max(worst, finite_difference(inst.net().parameters(), g, inst_loss).max_rel_error);

    randomize(critic, rng);
    auto critic_loss = [&] {
      const Tensor2 v = critic.predict(rows);
      double l = 0.0;
      for (Eigen::Index i = 0; i < v.rows(); ++i) l += 0.5 * std::pow(v(i, 0) - targets[static_cast<std::size_t>(i)], 2);
      return l;
    };
    const Tensor2& cv = critic.forward(rows);
    Tensor2 dc(cv.rows(), 1);
    for (Eigen::Index i = 0; i < cv.rows(); ++i) dc(i, 0) = cv(i, 0) - targets[static_cast<std::size_t>(i)];
    const auto gc = critic.backward(dc);
    worst = std::max(worst, finite_difference(critic.parameters(), gc, critic_loss).max_rel_error);
  }
  return worst;
}

}  // namespace vscrl::oracle
