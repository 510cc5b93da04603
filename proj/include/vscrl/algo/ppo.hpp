#pragma once

#include <chrono>
#include <numeric>
#include <random>

#include "vscrl/algo/config.hpp"
#include "vscrl/algo/metrics.hpp"
#include "vscrl/algo/rollout.hpp"
#include "vscrl/algo/vscrl.hpp"
#include "vscrl/nn/adam.hpp"

namespace vscrl::algo {

namespace detail {

struct PpoStep {
  Observation obs;
  int action = 0;
  double logp = 0.0;
  double value = 0.0;
  double advantage = 0.0;
  double ret = 0.0;
};

// GAE over one episode. The episode end (goal or timeout) is treated as
// terminal, so the bootstrap value past the last step is zero.
inline void gae(std::vector<PpoStep>& ep, const Trajectory& traj, double gamma, double lambda) {
  double next_value = 0.0;
  double acc = 0.0;
  for (std::size_t k = ep.size(); k-- > 0;) {
    const double delta = traj.steps[k].reward + gamma * next_value - ep[k].value;
    acc = delta + gamma * lambda * acc;
    ep[k].advantage = acc;
    ep[k].ret = acc + ep[k].value;
    next_value = ep[k].value;
  }
}

}  // namespace detail

// Clipped-surrogate PPO on the goal-conditioned task with a separate state
// value critic. Records follow the AWR schema: loss_awr carries the surrogate
// loss, loss_value the critic loss, and the imitation and weight fields are 0.
inline TrainResult train_ppo(const TrainConfig& cfg, const TaskSpec& task, const TrainHooks& hooks = {}) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  PolicyNet policy(task.shape(), cfg.hidden, splitmix64(cfg.seed ^ 0x1ULL));
  nn::MlpNet critic(layer_sizes(policy.input_dim(), cfg.hidden, 1), nn::Activation::tanh,
                    splitmix64(cfg.seed ^ 0x4ULL));
  nn::AdamState policy_opt(policy.net().parameter_count(), cfg.lr);
  nn::AdamState critic_opt(critic.parameter_count(), cfg.lr);
  std::mt19937_64 rng(splitmix64(cfg.seed));
  envs::GridMultiRoom env = task.make_env();
  const std::size_t slot = slot_of(task.goal);

  TrainResult result{{}, policy};
  long env_steps = 0;
  long next_eval = cfg.eval_every;
  std::uint64_t episode = 0;
  for (long epoch = 1; env_steps < cfg.total_steps; ++epoch) {
    std::vector<detail::PpoStep> data;
    int wins = 0;
    int episodes = 0;
    while (static_cast<long>(data.size()) < cfg.steps_per_epoch) {
      std::vector<detail::PpoStep> ep;
      auto r = run_episode(env, train_episode_seed(cfg.seed, episode++), task.goal, nullptr, {},
                           [&](const Observation& o, std::size_t s) {
                             const BinaryRows row = policy.single(o, s);
                             const Tensor2 logits = policy.net().predict(row);
                             const int a = sample_categorical(logits, rng);
                             const Tensor2 logp = nn::log_softmax_rows(logits);
                             ep.push_back({o, a, logp(0, a), critic.predict(row)(0, 0), 0.0, 0.0});
                             return a;
                           });
      detail::gae(ep, *r.traj, cfg.discount, cfg.gae_lambda);
      data.insert(data.end(), std::make_move_iterator(ep.begin()), std::make_move_iterator(ep.end()));
      wins += r.traj->success ? 1 : 0;
      ++episodes;
    }
    env_steps += static_cast<long>(data.size());

    Eigen::ArrayXd adv(static_cast<Eigen::Index>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i) adv(static_cast<Eigen::Index>(i)) = data[i].advantage;
    const double mean = adv.mean();
    const double sd = std::sqrt((adv - mean).square().mean());
    adv = (adv - mean) / (sd + 1e-8);

    double policy_loss = 0.0;
    double critic_loss = 0.0;
    long n_updates = 0;
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    const auto bs = static_cast<std::size_t>(cfg.batch_size);
    for (int pass = 0; pass < cfg.ppo_epochs; ++pass) {
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
      for (std::size_t start = 0; start < order.size(); start += bs) {
        const std::size_t stop = std::min(order.size(), start + bs);
        const auto n = static_cast<double>(stop - start);
        BinaryRows rows(policy.input_dim());
        for (std::size_t k = start; k < stop; ++k) policy.add_row(rows, data[order[k]].obs, slot);

        const Tensor2& logits = policy.net().forward(rows);
        const Tensor2 logp = nn::log_softmax_rows(logits);
        Tensor2 dlogits = Tensor2::Zero(logits.rows(), logits.cols());
        double loss = 0.0;
        for (Eigen::Index i = 0; i < logits.rows(); ++i) {
          const auto& s = data[order[start + static_cast<std::size_t>(i)]];
          const double a_hat = adv(static_cast<Eigen::Index>(order[start + static_cast<std::size_t>(i)]));
          const double ratio = std::exp(logp(i, s.action) - s.logp);
          const double clipped = std::clamp(ratio, 1.0 - cfg.ppo_clip, 1.0 + cfg.ppo_clip);
          loss -= std::min(ratio * a_hat, clipped * a_hat) / n;
          const bool active = !((a_hat > 0.0 && ratio > 1.0 + cfg.ppo_clip) ||
                                (a_hat < 0.0 && ratio < 1.0 - cfg.ppo_clip));
          const Eigen::RowVectorXd p = logp.row(i).array().exp();
          if (active) {
            const double g = -ratio * a_hat / n;
            dlogits.row(i) -= g * p;
            dlogits(i, s.action) += g;
          }
          const double entropy = -(p.array() * logp.row(i).array()).sum();
          loss -= cfg.entropy_coef * entropy / n;
          dlogits.row(i).array() += cfg.entropy_coef * p.array() * (logp.row(i).array() + entropy) / n;
        }
        auto grads = policy.net().backward(dlogits);
        nn::clip_grad_norm(grads, cfg.ppo_max_grad_norm);
        nn::adam_step(policy_opt, policy.net().parameters(), grads);
        if (hooks.on_policy_update) hooks.on_policy_update(policy);

        const Tensor2& v = critic.forward(rows);
        Tensor2 dv(v.rows(), 1);
        double vloss = 0.0;
        for (Eigen::Index i = 0; i < v.rows(); ++i) {
          const double err = v(i, 0) - data[order[start + static_cast<std::size_t>(i)]].ret;
          vloss += 0.5 * err * err / n;
          dv(i, 0) = err / n;
        }
        auto cgrads = critic.backward(dv);
        nn::clip_grad_norm(cgrads, cfg.ppo_max_grad_norm);
        nn::adam_step(critic_opt, critic.parameters(), cgrads);
        policy_loss += loss;
        critic_loss += vloss;
        ++n_updates;
      }
    }
    if (!std::isfinite(policy_loss) || !std::isfinite(critic_loss)) {
      throw Error("nan-gradient", "epoch " + std::to_string(epoch) + ": non-finite PPO loss");
    }

    MetricsRecord rec;
    rec.epoch = epoch;
    rec.env_steps = env_steps;
    rec.train_success = static_cast<double>(wins) / episodes;
    if (env_steps >= next_eval || env_steps >= cfg.total_steps) {
      rec.eval_success = evaluate_greedy(policy, task, nullptr, {}, cfg.eval_episodes);
      while (next_eval <= env_steps) next_eval += cfg.eval_every;
    }
    rec.loss_awr = policy_loss / static_cast<double>(n_updates);
    rec.loss_value = critic_loss / static_cast<double>(n_updates);
    rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    result.records.push_back(rec);
    if (hooks.on_record) hooks.on_record(rec);
  }
  result.policy = policy;
  return result;
}

}  // namespace vscrl::algo
