#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "vscrl/nn/tensor.hpp"

namespace vscrl::nn {

enum class Activation : std::uint32_t { relu = 0, tanh = 1, identity = 2 };

inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
  }
  return "?";
}

inline Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  if (s == "identity") return Activation::identity;
  throw Error("invalid-activation", s);
}

// Uniform double in [0, 1) built from raw engine output, so initialisation is
// identical on every standard library.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Fully connected network. Hidden layers use `activation`; the output layer
// is linear. Parameters live in one flat buffer, layer by layer, each layer
// being a row-major (in x out) weight block followed by its bias.
class MlpNet {
 public:
  using WeightMap = Eigen::Map<Tensor2>;
  using ConstWeightMap = Eigen::Map<const Tensor2>;
  using BiasMap = Eigen::Map<RowVector>;
  using ConstBiasMap = Eigen::Map<const RowVector>;

  MlpNet() = default;

  MlpNet(std::vector<int> sizes, Activation activation, std::uint64_t seed)
      : sizes_(std::move(sizes)), activation_(activation) {
    if (sizes_.size() < 2) throw Error("shape-error", "need at least input and output sizes");
    for (int s : sizes_) {
      if (s < 1) throw Error("shape-error", "layer sizes must be positive");
    }
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      offsets_.push_back(total);
      total += static_cast<std::size_t>(sizes_[l] * sizes_[l + 1] + sizes_[l + 1]);
    }
    params_.assign(total, 0.0);
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l < layers(); ++l) {
      const double fan_in = sizes_[l];
      const double fan_out = sizes_[l + 1];
      const double bound = activation_ == Activation::relu
                               ? std::sqrt(6.0 / fan_in)
                               : std::sqrt(6.0 / (fan_in + fan_out));
      auto w = weights(l);
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        w.data()[i] = (2.0 * unit_uniform(rng) - 1.0) * bound;
      }
    }
  }

  const std::vector<int>& sizes() const { return sizes_; }
  Activation activation() const { return activation_; }
  std::size_t layers() const { return sizes_.size() - 1; }
  std::size_t input_size() const { return static_cast<std::size_t>(sizes_.front()); }
  std::size_t output_size() const { return static_cast<std::size_t>(sizes_.back()); }
  std::size_t parameter_count() const { return params_.size(); }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  WeightMap weights(std::size_t l) {
    return WeightMap(params_.data() + offsets_[l], sizes_[l], sizes_[l + 1]);
  }
  ConstWeightMap weights(std::size_t l) const {
    return ConstWeightMap(params_.data() + offsets_[l], sizes_[l], sizes_[l + 1]);
  }
  BiasMap bias(std::size_t l) {
    return BiasMap(params_.data() + offsets_[l] + sizes_[l] * sizes_[l + 1], sizes_[l + 1]);
  }
  ConstBiasMap bias(std::size_t l) const {
    return ConstBiasMap(params_.data() + offsets_[l] + sizes_[l] * sizes_[l + 1],
                        sizes_[l + 1]);
  }

  // Zeroes the output layer so every input maps to the same (zero) output.
  void zero_output_layer() {
    weights(layers() - 1).setZero();
    bias(layers() - 1).setZero();
  }

  // Forward passes that record a tape for backward().
  const Tensor2& forward(const Tensor2& x) {
    check_input(static_cast<std::size_t>(x.cols()));
    tape_.emplace();
    tape_->input = x;
    return run(first_layer(x), &*tape_);
  }
  const Tensor2& forward(const BinaryRows& x) {
    check_input(x.cols());
    tape_.emplace();
    tape_->input = x;
    return run(first_layer(x), &*tape_);
  }

  // Tape-free evaluation; safe to call on a shared read-only network.
  Tensor2 predict(const Tensor2& x) const {
    check_input(static_cast<std::size_t>(x.cols()));
    return run_copy(first_layer(x));
  }
  Tensor2 predict(const BinaryRows& x) const {
    check_input(x.cols());
    return run_copy(first_layer(x));
  }

  // Reverse pass for the most recent forward(). Returns dLoss/dParameters in
  // the flat parameter layout and clears the tape.
  std::vector<double> backward(const Tensor2& loss_grad) {
    if (!tape_) throw Error("no-tape");
    Tape& tape = *tape_;
    const Tensor2& out = tape.post.back();
    if (loss_grad.rows() != out.rows() || loss_grad.cols() != out.cols()) {
      throw Error("shape-error", "loss gradient does not match output");
    }
    std::vector<double> grads(params_.size(), 0.0);
    Tensor2 delta = loss_grad;  // dLoss / d(pre-activation) of current layer
    for (std::size_t l = layers(); l-- > 0;) {
      if (l + 1 < layers()) apply_activation_grad(tape.pre[l], tape.post[l], delta);
      Eigen::Map<Tensor2> dw(grads.data() + offsets_[l], sizes_[l], sizes_[l + 1]);
      Eigen::Map<RowVector> db(grads.data() + offsets_[l] + sizes_[l] * sizes_[l + 1],
                               sizes_[l + 1]);
      db = delta.colwise().sum();
      if (l == 0) {
        if (const auto* dense = std::get_if<Tensor2>(&tape.input)) {
          dw.noalias() = dense->transpose() * delta;
        } else {
          const auto& bin = std::get<BinaryRows>(tape.input);
          for (std::size_t r = 0; r < bin.rows(); ++r) {
            for (auto p = bin.row_begin(r); p != bin.row_end(r); ++p) {
              dw.row(*p) += delta.row(static_cast<Eigen::Index>(r));
            }
          }
        }
      } else {
        dw.noalias() = tape.post[l - 1].transpose() * delta;
        Tensor2 prev = delta * weights(l).transpose();
        delta = std::move(prev);
      }
    }
    tape_.reset();
    return grads;
  }

  bool has_tape() const { return tape_.has_value(); }

 private:
  struct Tape {
    std::variant<Tensor2, BinaryRows> input{Tensor2{}};
    std::vector<Tensor2> pre;   // pre-activations per layer
    std::vector<Tensor2> post;  // activations per layer (last = output)
  };

  void check_input(std::size_t cols) const {
    if (sizes_.empty()) throw Error("shape-error", "uninitialised network");
    if (cols != input_size()) {
      throw Error("shape-error", "input has " + std::to_string(cols) + " columns, expected " +
                                     std::to_string(input_size()));
    }
  }

  Tensor2 first_layer(const Tensor2& x) const {
    Tensor2 z = x * weights(0);
    z.rowwise() += bias(0);
    return z;
  }
  Tensor2 first_layer(const BinaryRows& x) const {
    const auto w = weights(0);
    Tensor2 z(static_cast<Eigen::Index>(x.rows()), sizes_[1]);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      auto row = z.row(static_cast<Eigen::Index>(r));
      row = bias(0);
      for (auto p = x.row_begin(r); p != x.row_end(r); ++p) row += w.row(*p);
    }
    return z;
  }

  void activate(Tensor2& z) const {
    switch (activation_) {
      case Activation::relu: z = z.cwiseMax(0.0); break;
      case Activation::tanh: z = z.array().tanh().matrix(); break;
      case Activation::identity: break;
    }
  }

  void apply_activation_grad(const Tensor2& pre, const Tensor2& post, Tensor2& delta) const {
    switch (activation_) {
      case Activation::relu:
        delta = (pre.array() > 0.0).select(delta, 0.0);
        break;
      case Activation::tanh:
        delta = (delta.array() * (1.0 - post.array().square())).matrix();
        break;
      case Activation::identity: break;
    }
  }

  const Tensor2& run(Tensor2 z, Tape* tape) const {
    for (std::size_t l = 0;; ++l) {
      tape->pre.push_back(z);
      if (l + 1 == layers()) {
        tape->post.push_back(std::move(z));
        return tape->post.back();
      }
      activate(z);
      tape->post.push_back(z);
      Tensor2 next = tape->post.back() * weights(l + 1);
      next.rowwise() += bias(l + 1);
      z = std::move(next);
    }
  }

  Tensor2 run_copy(Tensor2 z) const {
    for (std::size_t l = 0;; ++l) {
      if (l + 1 == layers()) return z;
      activate(z);
      Tensor2 next = z * weights(l + 1);
      next.rowwise() += bias(l + 1);
      z = std::move(next);
    }
  }

  std::vector<int> sizes_;
  Activation activation_ = Activation::relu;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
  std::optional<Tape> tape_;
};

}  // namespace vscrl::nn
