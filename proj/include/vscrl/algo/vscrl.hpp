#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <random>

#include "vscrl/algo/config.hpp"
#include "vscrl/algo/filter.hpp"
#include "vscrl/algo/losses.hpp"
#include "vscrl/algo/metrics.hpp"
#include "vscrl/algo/rollout.hpp"
#include "vscrl/core/replay_buffer.hpp"
#include "vscrl/core/segment.hpp"
#include "vscrl/nn/adam.hpp"

namespace vscrl::algo {

struct TrainHooks {
  std::function<void(const MetricsRecord&)> on_record;
  // Called after every policy parameter update.
  std::function<void(const PolicyNet&)> on_policy_update;
};

struct TrainResult {
  std::vector<MetricsRecord> records;
  PolicyNet policy;
};

namespace detail {

struct UpdateStats {
  double loss_value = 0.0;
  double loss_awr = 0.0;
  double loss_imitation = 0.0;
  double mean_weight = 0.0;
};

// Networks, optimisers, replay and the update schedule shared by the VSC-RL
// trainer and the plain goal-conditioned AWR trainer.
class Learner {
 public:
  Learner(const TrainConfig& cfg, NetShape shape)
      : cfg_(cfg),
        policy_(shape, cfg.hidden, splitmix64(cfg.seed ^ 0x1ULL)),
        value_(shape, cfg.hidden, splitmix64(cfg.seed ^ 0x2ULL)),
        inst_(shape, cfg.hidden, splitmix64(cfg.seed ^ 0x3ULL)),
        policy_opt_(policy_.net().parameter_count(), cfg.lr),
        value_opt_(value_.net().parameter_count(), cfg.lr),
        inst_opt_(inst_.net().parameter_count(), cfg.lr),
        buffer_(cfg.buffer_capacity),
        rng_(splitmix64(cfg.seed)) {}

  PolicyNet& policy() { return policy_; }
  ReplayBuffer& buffer() { return buffer_; }
  std::mt19937_64& rng() { return rng_; }

  // Regresses the instruction-level value on discounted episode success, then
  // applies the margin filter to the new episodes.
  std::vector<std::shared_ptr<const Trajectory>> fit_and_filter(
      const std::vector<std::shared_ptr<const Trajectory>>& fresh, const Goal& goal) {
    for (const auto& t : fresh) {
      const double target =
          t->success ? std::pow(cfg_.discount, static_cast<double>(t->steps.size() - 1)) : 0.0;
      inst_data_.push_back({t->steps.front().obs, target});
      while (inst_data_.size() > kInstCapacity) inst_data_.pop_front();
    }
    const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(cfg_.batch_size), inst_data_.size());
    for (int step = 0; step < cfg_.update_epochs_value && batch > 0; ++step) {
      BinaryRows rows(inst_.input_dim());
      std::vector<double> targets;
      for (std::size_t k = 0; k < batch; ++k) {
        const auto& [obs, target] = inst_data_[rng_() % inst_data_.size()];
        inst_.add_row(rows, obs, goal);
        targets.push_back(target);
      }
      const Tensor2& z = inst_.net().forward(rows);
      Tensor2 dz(z.rows(), 1);
      for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double v = nn::sigmoid(z(i, 0));
        dz(i, 0) = 2.0 * (v - targets[static_cast<std::size_t>(i)]) * v * (1.0 - v) / static_cast<double>(batch);
      }
      step_optimizer(inst_opt_, inst_.net(), inst_.net().backward(dz));
    }
    if (!cfg_.use_filter) return fresh;
    return instruction_filter(fresh, goal, inst_, cfg_.filter_threshold);
  }

  // Value regression, then AWR, then imitation, each for its configured
  // number of epochs over the freshly collected steps.
  UpdateStats update(long fresh_steps, const ReferencePolicy* ref, const TrainHooks& hooks) {
    UpdateStats st;
    if (buffer_.empty()) return st;
    const long per_epoch = std::max<long>(1, fresh_steps / cfg_.batch_size);
    const auto bs = static_cast<std::size_t>(cfg_.batch_size);

    const long n_value = per_epoch * cfg_.update_epochs_value;
    for (long k = 0; k < n_value; ++k) {
      const Batch batch = buffer_.sample_batch(bs, rng_);
      auto out = value_loss(batch, value_);
      step_optimizer(value_opt_, value_.net(), std::move(out.grads));
      st.loss_value += out.loss / static_cast<double>(n_value);
    }
    if (!cfg_.skip_awr) {
      const long n_awr = per_epoch * cfg_.update_epochs_awr;
      for (long k = 0; k < n_awr; ++k) {
        const Batch batch = buffer_.sample_batch(bs, rng_);
        auto out = awr_policy_loss(batch, policy_, value_, cfg_.beta, cfg_.w_max);
        step_optimizer(policy_opt_, policy_.net(), std::move(out.grads));
        if (hooks.on_policy_update) hooks.on_policy_update(policy_);
        st.loss_awr += out.loss / static_cast<double>(n_awr);
        st.mean_weight += out.mean_weight / static_cast<double>(n_awr);
      }
    }
    if (!cfg_.skip_imitation && cfg_.imitation_weight != 0.0 && ref != nullptr) {
      const long n_imit = per_epoch * cfg_.update_epochs_imitation;
      for (long k = 0; k < n_imit; ++k) {
        const Batch batch = buffer_.sample_batch(bs, rng_);
        auto out = imitation_loss(batch, policy_, *ref, rng_);
        for (auto& g : out.grads) g *= cfg_.imitation_weight;
        step_optimizer(policy_opt_, policy_.net(), std::move(out.grads));
        if (hooks.on_policy_update) hooks.on_policy_update(policy_);
        st.loss_imitation += out.loss / static_cast<double>(n_imit);
      }
    }
    return st;
  }

 private:
  static constexpr std::size_t kInstCapacity = 2048;

  void step_optimizer(nn::AdamState& opt, nn::MlpNet& net, std::vector<double> grads) {
    if (!std::isfinite(nn::global_norm(grads))) throw Error("nan-gradient", "non-finite gradient");
    if (cfg_.max_grad_norm > 0.0) nn::clip_grad_norm(grads, cfg_.max_grad_norm);
    nn::adam_step(opt, net.parameters(), grads);
  }

  const TrainConfig& cfg_;
  PolicyNet policy_;
  ValueNet value_;
  InstructionValueNet inst_;
  nn::AdamState policy_opt_;
  nn::AdamState value_opt_;
  nn::AdamState inst_opt_;
  ReplayBuffer buffer_;
  std::deque<std::pair<Observation, double>> inst_data_;
  std::mt19937_64 rng_;
};

// Epoch loop shared by both AWR-family trainers; `plan` is null for the
// goal-conditioned variant.
inline TrainResult run_awr_loop(const TrainConfig& cfg, const TaskSpec& task,
                                const PlanProvider* plans, const EvaluatorFactory& make_evaluator,
                                const ReferencePolicy* ref, const TrainHooks& hooks) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  Learner learner(cfg, task.shape());
  envs::GridMultiRoom env = task.make_env();
  TrainResult result{{}, learner.policy()};
  long env_steps = 0;
  long next_eval = cfg.eval_every;
  std::uint64_t episode = 0;
  for (long epoch = 1; env_steps < cfg.total_steps; ++epoch) {
    std::optional<subgoal_gen::SubgoalPlan> plan;
    if (plans) plan = subgoal_gen::validate_plan((*plans)(task.goal), task.goal);
    const std::vector<Subgoal>* subgoals = plan ? &plan->subgoals : nullptr;

    std::vector<std::shared_ptr<const Trajectory>> fresh;
    std::vector<Rollout> rollouts;
    long fresh_steps = 0;
    int wins = 0;
    const PolicyNet& policy = learner.policy();
    auto& rng = learner.rng();
    while (fresh_steps < cfg.steps_per_epoch) {
      auto r = run_episode(env, train_episode_seed(cfg.seed, episode++), task.goal, subgoals, make_evaluator,
                           [&](const Observation& o, std::size_t slot) { return policy.sample(o, slot, rng); });
      fresh_steps += static_cast<long>(r.traj->steps.size());
      wins += r.traj->success ? 1 : 0;
      fresh.push_back(r.traj);
      rollouts.push_back(std::move(r));
    }
    env_steps += fresh_steps;

    UpdateStats st;
    try {
      const auto kept = learner.fit_and_filter(fresh, task.goal);
      for (const auto& t : kept) {
        const auto it = std::find_if(rollouts.begin(), rollouts.end(),
                                     [&](const Rollout& r) { return r.traj == t; });
        if (subgoals) {
          for (auto& sub : segment(t, *subgoals, it->evaluator)) learner.buffer().push(std::move(sub), task.goal);
        } else {
          learner.buffer().push(
              SubTrajectory{t, 0, t->steps.size(), identity_subgoal(task.goal), t->success ? 1.0 : 0.0}, task.goal);
        }
      }
      st = learner.update(fresh_steps, ref, hooks);
    } catch (const Error& e) {
      if (e.code() == "nan-gradient") throw Error("nan-gradient", "epoch " + std::to_string(epoch) + ": " + e.what());
      throw;
    }

    MetricsRecord rec;
    rec.epoch = epoch;
    rec.env_steps = env_steps;
    rec.train_success = static_cast<double>(wins) / static_cast<double>(fresh.size());
    if (env_steps >= next_eval || env_steps >= cfg.total_steps) {
      rec.eval_success = evaluate_greedy(learner.policy(), task, subgoals, make_evaluator, cfg.eval_episodes);
      while (next_eval <= env_steps) next_eval += cfg.eval_every;
    }
    rec.loss_awr = st.loss_awr;
    rec.loss_value = st.loss_value;
    rec.loss_imitation = st.loss_imitation;
    rec.mean_awr_weight = st.mean_weight;
    rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    result.records.push_back(rec);
    if (hooks.on_record) hooks.on_record(rec);
  }
  result.policy = learner.policy();
  return result;
}

}  // namespace detail

// VSC-RL: per epoch fetch the subgoal plan, roll out conditioned on the
// active subgoal, segment post hoc, filter, replay, then update value (squared
// error), policy (AWR) and policy (imitation of the frozen reference).
inline TrainResult train_vscrl(const TrainConfig& cfg, const TaskSpec& task, const PlanProvider& plans,
                               const EvaluatorFactory& make_evaluator, const ReferencePolicy& ref,
                               const TrainHooks& hooks = {}) {
  return detail::run_awr_loop(cfg, task, &plans, make_evaluator, &ref, hooks);
}

// Plain goal-conditioned AWR: no subgoals, the whole episode is one sample
// group whose return is the success bit.
inline TrainResult train_gc_awr(const TrainConfig& cfg, const TaskSpec& task, const TrainHooks& hooks = {}) {
  return detail::run_awr_loop(cfg, task, nullptr, {}, nullptr, hooks);
}

}  // namespace vscrl::algo
