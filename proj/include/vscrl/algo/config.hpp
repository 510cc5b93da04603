#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vscrl/error.hpp"

namespace vscrl::algo {

// Defaults follow the MiniGrid hyperparameter table (batch 256, 200k steps,
// gamma 0.99, lr 1e-3, two hidden layers, ReLU, Adam, 4 update epochs per
// loss). The remaining knobs are desk-scale choices.
struct TrainConfig {
  int batch_size = 256;
  long total_steps = 200000;
  double discount = 0.99;
  double lr = 1e-3;
  std::vector<int> hidden{256, 256};
  int update_epochs_value = 4;
  int update_epochs_awr = 4;
  int update_epochs_imitation = 4;

  double beta = 0.25;     // AWR temperature
  double alpha = 1.0;     // optimality temperature (theory checks)
  double w_max = 20.0;    // AWR weight clamp
  double imitation_weight = 1.0;
  double filter_threshold = -0.7;  // instruction-level margin rule
  bool use_filter = true;
  bool skip_awr = false;        // ablation "w/o policy gradient"
  bool skip_imitation = false;  // ablation "w/o imitation loss"
  double max_grad_norm = 1.0;   // 0 disables clipping

  int steps_per_epoch = 1024;
  std::size_t buffer_capacity = 1500;  // sub-trajectories
  int eval_episodes = 100;
  long eval_every = 10000;
  std::uint64_t seed = 1;

  // PPO baseline
  double ppo_clip = 0.2;
  double gae_lambda = 0.95;
  double entropy_coef = 0.01;
  int ppo_epochs = 4;
  double ppo_max_grad_norm = 0.5;

  // Behaviour-cloned reference policy
  int ref_demos = 100;
  int ref_epochs = 100;
  double ref_noise = 0.0;

  bool operator==(const TrainConfig&) const = default;

  void validate() const {
    if (!(beta > 0.0)) throw Error("invalid-config", "beta must be positive");
    if (!(alpha > 0.0)) throw Error("invalid-config", "alpha must be positive");
    if (!(discount > 0.0 && discount <= 1.0)) throw Error("invalid-config", "discount must be in (0, 1]");
    if (batch_size < 1) throw Error("invalid-config", "batch_size must be >= 1");
    if (!(w_max > 0.0)) throw Error("invalid-config", "w_max must be positive");
    if (total_steps < 1 || steps_per_epoch < 1) throw Error("invalid-config", "total_steps and steps_per_epoch must be positive");
    if (eval_episodes < 1) throw Error("invalid-config", "eval_episodes must be >= 1");
    if (buffer_capacity < 1) throw Error("invalid-config", "buffer_capacity must be >= 1");
    if (hidden.empty()) throw Error("invalid-config", "hidden must list at least one layer");
  }
};

}  // namespace vscrl::algo
