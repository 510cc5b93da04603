#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vscrl/error.hpp"

namespace vscrl::nn {

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;

  AdamState() = default;
  AdamState(std::size_t n_params, double learning_rate)
      : lr(learning_rate), m(n_params, 0.0), v(n_params, 0.0) {}
};

// Adam with bias correction. Throws "nan-gradient" before touching anything
// if a gradient entry is not finite.
inline void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw Error("shape-error", "adam state, parameters and gradients differ in size");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw Error("nan-gradient", "entry " + std::to_string(i));
    }
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

inline double global_norm(std::span<const double> grads) {
  double s = 0.0;
  for (double g : grads) s += g * g;
  return std::sqrt(s);
}

// Rescales so the global L2 norm is at most max_norm. Returns the norm
// before clipping.
inline double clip_grad_norm(std::span<double> grads, double max_norm) {
  if (!(max_norm > 0.0)) throw Error("invalid-argument", "max_norm must be positive");
  const double norm = global_norm(grads);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (double& g : grads) g *= scale;
  }
  return norm;
}

}  // namespace vscrl::nn
