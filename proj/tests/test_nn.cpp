#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "gradcheck.hpp"
#include "vscrl/nn/adam.hpp"
#include "vscrl/nn/checkpoint.hpp"
#include "vscrl/nn/mlp.hpp"

using namespace vscrl;
using namespace vscrl::nn;

namespace {

Tensor2 random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> n(0.0, 1.0);
  Tensor2 m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

// Straightforward reimplementation: explicit loops over weights.
Tensor2 reference_forward(const MlpNet& net, const Tensor2& x) {
  Tensor2 h = x;
  for (std::size_t l = 0; l < net.layers(); ++l) {
    const auto w = net.weights(l);
    const auto b = net.bias(l);
    Tensor2 z(h.rows(), w.cols());
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        double s = b(j);
        for (Eigen::Index k = 0; k < w.rows(); ++k) s += h(i, k) * w(k, j);
        if (l + 1 < net.layers()) {
          switch (net.activation()) {
            case Activation::relu: s = std::max(0.0, s); break;
            case Activation::tanh: s = std::tanh(s); break;
            case Activation::identity: break;
          }
        }
        z(i, j) = s;
      }
    }
    h = z;
  }
  return h;
}

// Loss 0.5 * sum((f(x) * C)) for a fixed random C, so dL/dout = C.
double probe_loss(const MlpNet& net, const Tensor2& x, const Tensor2& c) {
  return (net.predict(x).array() * c.array()).sum();
}

}  // namespace

TEST(Forward, IdentityLayerPassesInputThrough) {
  MlpNet net({3, 3}, Activation::identity, 1);
  net.weights(0).setIdentity();
  net.bias(0).setZero();
  std::mt19937_64 rng(1);
  const Tensor2 x = random_matrix(rng, 5, 3);
  EXPECT_EQ(net.forward(x), x);
}

TEST(Forward, ReluOfNegativePreActivationsIsZero) {
  MlpNet net({2, 3, 2}, Activation::relu, 1);
  net.weights(0).setConstant(-1.0);
  net.bias(0).setConstant(-0.5);
  net.bias(1).setZero();
  Tensor2 x(4, 2);
  x.setConstant(2.0);
  EXPECT_TRUE(net.predict(x).isZero(0.0));
}

TEST(Forward, MatchesLoopImplementation) {
  std::mt19937_64 rng(2);
  for (auto act : {Activation::relu, Activation::tanh, Activation::identity}) {
    MlpNet net({7, 9, 5, 3}, act, 11);
    const Tensor2 x = random_matrix(rng, 6, 7);
    EXPECT_LE((net.predict(x) - reference_forward(net, x)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Forward, BinaryRowsMatchDense) {
  MlpNet net({10, 8, 4}, Activation::relu, 3);
  BinaryRows rows(10);
  rows.set(1);
  rows.set(7);
  rows.end_row();
  rows.set(0);
  rows.end_row();
  rows.end_row();
  EXPECT_LE((net.predict(rows) - net.predict(rows.dense())).cwiseAbs().maxCoeff(), 1e-12);
  const Tensor2 dz = Tensor2::Ones(3, 4);
  net.forward(rows);
  const auto g_sparse = net.backward(dz);
  net.forward(rows.dense());
  const auto g_dense = net.backward(dz);
  for (std::size_t i = 0; i < g_sparse.size(); ++i) EXPECT_NEAR(g_sparse[i], g_dense[i], 1e-12);
}

TEST(Forward, ShapeError) {
  MlpNet net({4, 2}, Activation::relu, 1);
  try {
    net.predict(Tensor2::Zero(2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "shape-error");
  }
  EXPECT_THROW(MlpNet({4}, Activation::relu, 1), Error);
}

TEST(Backward, LinearQuadraticClosedForm) {
  std::mt19937_64 rng(4);
  MlpNet net({3, 2}, Activation::identity, 5);
  const Tensor2 x = random_matrix(rng, 8, 3);
  const Tensor2 y = random_matrix(rng, 8, 2);
  const double n = 8.0;
  const Tensor2& out = net.forward(x);
  const Tensor2 resid = out - y;
  const auto grads = net.backward(2.0 * resid / n);  // loss = sum(resid^2)/n
  const Tensor2 expected_w = 2.0 * x.transpose() * resid / n;
  Eigen::Map<const Tensor2> gw(grads.data(), 3, 2);
  EXPECT_LE((gw - expected_w).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Backward, FiniteDifferenceEveryParameter) {
  std::mt19937_64 rng(5);
  for (auto act : {Activation::relu, Activation::tanh, Activation::identity}) {
    for (int draw = 0; draw < 10; ++draw) {
      MlpNet net({6, 8, 7, 3}, act, 100 + static_cast<std::uint64_t>(draw));
      // Zero biases put units whose inputs are all dead exactly on the relu kink.
      for (std::size_t l = 0; l < net.layers(); ++l) net.bias(l) = 0.1 * random_matrix(rng, 1, net.bias(l).size());
      const Tensor2 x = random_matrix(rng, 5, 6);
      const Tensor2 c = random_matrix(rng, 5, 3);
      net.forward(x);
      const auto grads = net.backward(c);
      const auto r = oracle::finite_difference(net.parameters(), grads, [&] { return probe_loss(net, x, c); });
      EXPECT_EQ(r.checked, net.parameter_count());
      EXPECT_LE(r.max_rel_error, 1e-4) << to_string(act) << " draw " << draw;
    }
  }
}

TEST(Backward, ZeroInZeroOutAndNoTape) {
  MlpNet net({4, 5, 2}, Activation::tanh, 1);
  std::mt19937_64 rng(6);
  net.forward(random_matrix(rng, 3, 4));
  for (double g : net.backward(Tensor2::Zero(3, 2))) EXPECT_EQ(g, 0.0);
  try {
    net.backward(Tensor2::Zero(3, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "no-tape");
  }
  net.forward(random_matrix(rng, 3, 4));
  EXPECT_THROW(net.backward(Tensor2::Zero(2, 2)), Error);
}

TEST(Softmax, LogSoftmaxStable) {
  Tensor2 logits(2, 3);
  logits << 1000.0, 1001.0, 1002.0, -5.0, 0.0, 5.0;
  const Tensor2 lp = log_softmax_rows(logits);
  EXPECT_TRUE(lp.allFinite());
  for (Eigen::Index r = 0; r < 2; ++r) EXPECT_NEAR(lp.row(r).array().exp().sum(), 1.0, 1e-12);
  EXPECT_NEAR(sigmoid(-800.0), 0.0, 1e-300);
  EXPECT_EQ(sigmoid(0.0), 0.5);
}

TEST(Adam, ZeroGradientsLeaveParameters) {
  std::vector<double> p{1.0, -2.0, 3.0};
  const auto before = p;
  AdamState st(3, 1e-3);
  for (int k = 0; k < 10; ++k) adam_step(st, p, std::vector<double>(3, 0.0));
  EXPECT_EQ(p, before);
  EXPECT_EQ(st.step, 10u);
}

TEST(Adam, ConstantGradientStepApproachesLr) {
  std::vector<double> p{0.0, 0.0};
  AdamState st(2, 1e-3);
  double last = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double before = p[0];
    adam_step(st, p, std::vector<double>{3.0, -0.2});
    last = p[0] - before;
  }
  EXPECT_NEAR(last, -1e-3, 1e-6);
  EXPECT_GT(p[1], 0.0);
}

TEST(Adam, MinimisesQuadratic) {
  // f(x, y) = (x - 1)^2 + 10 (y + 2)^2
  std::vector<double> p{4.0, 3.0};
  AdamState st(2, 0.05);
  for (int k = 0; k < 500; ++k) {
    adam_step(st, p, std::vector<double>{2.0 * (p[0] - 1.0), 20.0 * (p[1] + 2.0)});
  }
  EXPECT_LT(std::hypot(p[0] - 1.0, p[1] + 2.0), 1e-3);
}

TEST(Adam, NanGradientRejectedBeforeUpdate) {
  std::vector<double> p{1.0, 2.0};
  AdamState st(2, 1e-3);
  try {
    adam_step(st, p, std::vector<double>{0.5, std::nan("")});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "nan-gradient");
  }
  EXPECT_EQ(p, (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(st.step, 0u);
}

TEST(Clip, Contracts) {
  std::vector<double> small{0.3, 0.4};
  EXPECT_DOUBLE_EQ(clip_grad_norm(small, 1.0), 0.5);
  EXPECT_EQ(small, (std::vector<double>{0.3, 0.4}));
  std::vector<double> big{6.0, 8.0};
  EXPECT_DOUBLE_EQ(clip_grad_norm(big, 1.0), 10.0);
  EXPECT_NEAR(big[0], 0.6, 1e-15);
  EXPECT_NEAR(big[1], 0.8, 1e-15);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> g(1 + rng() % 20);
    for (auto& v : g) v = n(rng);
    const double max_norm = 0.1 + (rng() % 100) / 10.0;
    clip_grad_norm(g, max_norm);
    EXPECT_LE(global_norm(g), max_norm + 1e-12);
  }
  EXPECT_THROW(clip_grad_norm(big, 0.0), Error);
}

TEST(Checkpoint, RoundTripAndErrors) {
  const auto dir = std::filesystem::temp_directory_path() / "vscrl_nn_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "net.ckpt").string();
  MlpNet net({5, 4, 3}, Activation::tanh, 9);
  save_checkpoint(net, path);
  const MlpNet back = load_checkpoint(path);
  EXPECT_EQ(back.sizes(), net.sizes());
  EXPECT_EQ(back.activation(), net.activation());
  EXPECT_TRUE(std::equal(back.parameters().begin(), back.parameters().end(), net.parameters().begin()));
  std::ifstream man(path + ".manifest");
  std::string text((std::istreambuf_iterator<char>(man)), {});
  EXPECT_NE(text.find(hex64(parameter_hash(net))), std::string::npos);

  try {
    load_checkpoint((dir / "missing.ckpt").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "missing-checkpoint");
  }
  std::ofstream((dir / "junk.ckpt").string()) << "not a checkpoint";
  try {
    load_checkpoint((dir / "junk.ckpt").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "corrupt-checkpoint");
  }
  // Truncated parameter block.
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 16);
  EXPECT_THROW(load_checkpoint(path), Error);
}
