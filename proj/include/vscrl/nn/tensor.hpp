#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "vscrl/error.hpp"

namespace vscrl::nn {

using Tensor2 = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

// Batch of binary input rows stored as active column indices (CSR layout).
// Every network input in this project is a concatenation of one-hot blocks,
// so this is the common fast path; dense Tensor2 input is kept for tests.
class BinaryRows {
 public:
  explicit BinaryRows(std::size_t cols) : cols_(cols) { offsets_.push_back(0); }

  void begin_row() {}
  void set(std::size_t col) {
    if (col >= cols_) throw Error("shape-error", "binary column out of range");
    idx_.push_back(static_cast<std::uint32_t>(col));
  }
  void end_row() { offsets_.push_back(idx_.size()); }

  std::size_t rows() const { return offsets_.size() - 1; }
  std::size_t cols() const { return cols_; }
  const std::uint32_t* row_begin(std::size_t r) const { return idx_.data() + offsets_[r]; }
  const std::uint32_t* row_end(std::size_t r) const { return idx_.data() + offsets_[r + 1]; }

  Tensor2 dense() const {
    Tensor2 out = Tensor2::Zero(static_cast<Eigen::Index>(rows()),
                                static_cast<Eigen::Index>(cols_));
    for (std::size_t r = 0; r < rows(); ++r) {
      for (auto p = row_begin(r); p != row_end(r); ++p) {
        out(static_cast<Eigen::Index>(r), *p) = 1.0;
      }
    }
    return out;
  }

 private:
  std::size_t cols_;
  std::vector<std::uint32_t> idx_;
  std::vector<std::size_t> offsets_;
};

inline bool all_finite(const Tensor2& t) { return t.allFinite(); }

// Row-wise log-softmax in max-shifted form.
inline Tensor2 log_softmax_rows(const Tensor2& logits) {
  Tensor2 out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    const double lse = m + std::log((logits.row(r).array() - m).exp().sum());
    out.row(r) = logits.row(r).array() - lse;
  }
  return out;
}

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace vscrl::nn
