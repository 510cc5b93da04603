#pragma once

#include <numeric>
#include <random>
#include <vector>

#include "vscrl/algo/losses.hpp"
#include "vscrl/algo/rollout.hpp"
#include "vscrl/envs/oracle.hpp"
#include "vscrl/nn/adam.hpp"

namespace vscrl::algo {

// Demonstrations from the shortest-path oracle. With probability `noise` a
// step takes a uniformly random action instead.
inline std::vector<Trajectory> collect_oracle_demos(const TaskSpec& task, int episodes,
                                                    std::uint64_t seed, double noise = 0.0) {
  std::vector<Trajectory> demos;
  envs::GridMultiRoom env = task.make_env();
  std::mt19937_64 rng(seed);
  for (int e = 0; e < episodes; ++e) {
    auto r = run_episode(env, splitmix64(seed ^ (0xdeadbeefULL + static_cast<std::uint64_t>(e))),
                         task.goal, nullptr, {}, [&](const Observation&, std::size_t) {
                           if (noise > 0.0 && nn::unit_uniform(rng) < noise) {
                             return static_cast<int>(rng() % envs::kNumActions);
                           }
                           return envs::oracle_action(env);
                         });
    demos.push_back(std::move(*r.traj));
  }
  return demos;
}

struct ReferenceTraining {
  int epochs = 10;
  int batch_size = 256;
  double lr = 1e-3;
  std::vector<int> hidden{64, 64};
  std::uint64_t seed = 1;
};

// Goal-conditioned behaviour cloning on the demonstrations, then frozen.
// Zero epochs yields the uniform policy, tagged "untrained".
inline ReferencePolicy pretrain_reference(const TaskSpec& task, const std::vector<Trajectory>& demos,
                                          const ReferenceTraining& opts) {
  if (demos.empty()) throw Error("no-demos");
  PolicyNet policy(task.shape(), opts.hidden, splitmix64(opts.seed ^ 0x5eedULL));
  if (opts.epochs <= 0) return ReferencePolicy(std::move(policy), "untrained");

  std::vector<const Transition*> data;
  for (const auto& d : demos) {
    for (const auto& t : d.steps) data.push_back(&t);
  }
  if (data.empty()) throw Error("no-demos", "demonstrations hold no transitions");
  nn::AdamState adam(policy.net().parameter_count(), opts.lr);
  std::mt19937_64 rng(opts.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t slot = slot_of(task.goal);
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(opts.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(opts.batch_size));
      BinaryRows rows(policy.input_dim());
      std::vector<int> actions;
      for (std::size_t k = start; k < stop; ++k) {
        policy.add_row(rows, data[order[k]]->obs, slot);
        actions.push_back(data[order[k]]->action);
      }
      const Eigen::ArrayXd ones = Eigen::ArrayXd::Ones(static_cast<Eigen::Index>(actions.size()));
      auto loss = detail::weighted_nll(policy, rows, actions, ones);
      nn::adam_step(adam, policy.net().parameters(), loss.grads);
    }
  }
  return ReferencePolicy(std::move(policy), "behaviour-cloned:" + std::to_string(demos.size()) +
                                                " demos x " + std::to_string(opts.epochs) + " epochs");
}

}  // namespace vscrl::algo
