// Copyright 2026 The isac-e2e Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>

#include "isac/adam.hpp"
#include "isac/mlp.hpp"
#include "isac/rng.hpp"
#include "isac/tape.hpp"

using namespace isac;
using namespace isac::nn;

namespace {

Matrix random_matrix(Rng& r, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.normal(0.0, 1.0);
  return m;
}

// Sum of a fixed random projection of the output, so every output contributes.
double scalar_out(const Mlp& net, const Matrix& x, const Matrix& proj) { return (net.forward(x).cwiseProduct(proj)).sum(); }

void check_mlp_gradients(Activation act, std::vector<int> dims, double rel_tol) {
  Rng r(100 + static_cast<int>(act));
  Mlp net = Mlp::init(r, dims, act);
  for (auto* b : net.tensors()) *b += 0.1 * random_matrix(r, b->rows(), b->cols());
  const Matrix x = random_matrix(r, dims.front(), 5);
  const Matrix proj = random_matrix(r, dims.back(), 5);

  Tape tape;
  const BoundMlp bound = bind(tape, net, true);
  const Var xin = tape.parameter(x);
  const Var out = sum(forward(bound, xin) * tape.constant(proj));
  EXPECT_NEAR(out.value()(0, 0), scalar_out(net, x, proj), 1e-12);
  tape.backward(out);
  const std::vector<Matrix> grads = bound.grads();

  const double h = 1e-5;
  auto tensors = net.tensors();
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    for (Eigen::Index i = 0; i < tensors[t]->size(); i += 3) {
      double& p = tensors[t]->data()[i];
      const double orig = p;
      p = orig + h;
      const double fp = scalar_out(net, x, proj);
      p = orig - h;
      const double fm = scalar_out(net, x, proj);
      p = orig;
      const double fd = (fp - fm) / (2 * h);
      const double an = grads[t].data()[i];
      EXPECT_NEAR(an, fd, rel_tol * std::max(1.0, std::abs(fd))) << "tensor " << t << " index " << i;
    }
  }
  const Matrix gx = tape.grad(xin);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Matrix xp = x, xm = x;
    xp.data()[i] += h;
    xm.data()[i] -= h;
    const double fd = (scalar_out(net, xp, proj) - scalar_out(net, xm, proj)) / (2 * h);
    EXPECT_NEAR(gx.data()[i], fd, rel_tol * std::max(1.0, std::abs(fd)));
  }
}

// Central-difference check of a unary tape op on random input.
void check_unary(const std::function<Var(Var)>& op, const std::function<Matrix(const Matrix&)>& ref, Matrix x) {
  Tape tape;
  const Var in = tape.parameter(x);
  const Var out = sum(op(in));
  tape.backward(out);
  const Matrix g = tape.grad(in);
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Matrix xp = x, xm = x;
    xp.data()[i] += h;
    xm.data()[i] -= h;
    const double fd = (ref(xp).sum() - ref(xm).sum()) / (2 * h);
    EXPECT_NEAR(g.data()[i], fd, 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

}  // namespace

TEST(Mlp, ParameterCount) {
  Rng r(1);
  const Mlp net = Mlp::init(r, {4, 16, 16, 32, 32}, Activation::Linear);
  // 4*16+16 + 16*16+16 + 16*32+32 + 32*32+32 = 80 + 272 + 544 + 1056
  EXPECT_EQ(net.parameter_count(), 1952u);
  std::size_t n = 0;
  for (const auto* t : net.tensors()) n += static_cast<std::size_t>(t->size());
  EXPECT_EQ(n, 1952u);
}

TEST(Mlp, InitDeterministicAndGlorotBounds) {
  Rng a(5), b(5);
  const Mlp x = Mlp::init(a, {8, 16, 4}, Activation::Sigmoid);
  const Mlp y = Mlp::init(b, {8, 16, 4}, Activation::Sigmoid);
  EXPECT_EQ(x, y);
  const double lim0 = std::sqrt(6.0 / (8 + 16));
  EXPECT_LE(x.weights[0].cwiseAbs().maxCoeff(), lim0);
  EXPECT_TRUE(x.biases[0].isZero());
  EXPECT_TRUE(x.biases[1].isZero());
}

TEST(Mlp, InitWeightMeanAcrossSeeds) {
  const int n = 10'000;
  double sum = 0.0;
  for (int s = 0; s < n; ++s) {
    Rng r(static_cast<std::uint64_t>(s));
    sum += Mlp::init(r, {4, 8}, Activation::Linear).weights[0](2, 1);
  }
  const double lim = std::sqrt(6.0 / 12.0);
  const double sd = lim / std::sqrt(3.0) / std::sqrt(static_cast<double>(n));
  EXPECT_LT(std::abs(sum / n), 3 * sd);
}

TEST(Mlp, ZeroNetOutputs) {
  Rng r(2);
  Mlp sig = Mlp::init(r, {3, 5, 2}, Activation::Sigmoid);
  Mlp soft = Mlp::init(r, {3, 5, 4}, Activation::Softmax);
  for (Mlp* n : {&sig, &soft})
    for (auto* t : n->tensors()) t->setZero();
  const Eigen::VectorXd in = Eigen::VectorXd(Eigen::VectorXd::Random(3));
  EXPECT_TRUE(sig.forward(in).isApprox(Eigen::VectorXd::Constant(2, 0.5)));
  EXPECT_TRUE(soft.forward(in).isApprox(Eigen::VectorXd::Constant(4, 0.25)));
}

TEST(Mlp, OutputRangesAndPurity) {
  Rng r(3);
  const Matrix x = 5.0 * random_matrix(r, 6, 200);
  const Mlp soft = Mlp::init(r, {6, 12, 4}, Activation::Softmax);
  const Matrix ps = soft.forward(x);
  for (Eigen::Index c = 0; c < ps.cols(); ++c) EXPECT_NEAR(ps.col(c).sum(), 1.0, 1e-12);
  const Matrix sg = Mlp::init(r, {6, 12, 3}, Activation::Sigmoid).forward(x);
  EXPECT_GT(sg.minCoeff(), 0.0);
  EXPECT_LT(sg.maxCoeff(), 1.0);
  const Matrix th = Mlp::init(r, {6, 12, 3}, Activation::ScaledTanh).forward(x);
  EXPECT_LE(th.cwiseAbs().maxCoeff(), std::numbers::pi / 2);
  for (Activation a : {Activation::ReluFloor, Activation::SoftplusFloor}) {
    Mlp f = Mlp::init(r, {6, 12, 1}, a);
    f.biases.back()(0, 0) = -100.0;
    EXPECT_GE(f.forward(x).minCoeff(), kSigmaFloor);
  }
  EXPECT_EQ(soft.forward(x), soft.forward(x));
}

TEST(Mlp, DimensionMismatchThrows) {
  Rng r(4);
  const Mlp net = Mlp::init(r, {3, 4, 2}, Activation::Linear);
  EXPECT_THROW(net.forward(Eigen::VectorXd(Eigen::VectorXd::Zero(5))), std::invalid_argument);
}

TEST(Mlp, GradientsEveryActivation) {
  for (Activation a : {Activation::Linear, Activation::Sigmoid, Activation::ScaledTanh, Activation::ReluFloor,
                       Activation::SoftplusFloor, Activation::Softmax})
    check_mlp_gradients(a, {4, 7, 6, 3}, 1e-5);
}

TEST(Mlp, GradientsArchitectureShapes) {
  // Encoder, beamformer, radar receiver and comm receiver layouts at K = 16.
  check_mlp_gradients(Activation::Linear, {4, 16, 16, 32, 2}, 1e-5);
  check_mlp_gradients(Activation::Linear, {4, 16, 16, 32, 32}, 1e-5);
  check_mlp_gradients(Activation::Sigmoid, {32, 32, 32, 16, 1}, 1e-5);
  check_mlp_gradients(Activation::Softmax, {4, 16, 32, 32, 4}, 1e-5);
}

TEST(Tape, ConstantLossHasZeroGradient) {
  Tape tape;
  const Var p = tape.parameter(Matrix::Constant(2, 2, 3.0));
  const Var out = sum(0.0 * p) + tape.constant(5.0);
  tape.backward(out);
  EXPECT_TRUE(tape.grad(p).isZero());
}

TEST(Tape, HalfSquaredNormGradientIsParams) {
  Rng r(5);
  const Matrix w = random_matrix(r, 3, 4);
  Tape tape;
  const Var p = tape.parameter(w);
  tape.backward(0.5 * sum(square(p)));
  EXPECT_TRUE(tape.grad(p).isApprox(w, 1e-14));
}

TEST(Tape, BackwardTwiceOrNonScalarThrows) {
  Tape tape;
  const Var p = tape.parameter(Matrix::Ones(2, 1));
  EXPECT_THROW(tape.backward(p), std::invalid_argument);
  const Var s = sum(p);
  tape.backward(s);
  EXPECT_THROW(tape.backward(s), std::logic_error);
}

TEST(Tape, UnaryOpsMatchFiniteDifferences) {
  Rng r(6);
  const Matrix x = random_matrix(r, 3, 4);
  const Matrix pos = x.cwiseAbs().array() + 0.5;
  check_unary([](Var a) { return sigmoid(a); }, [](const Matrix& m) -> Matrix { return (1.0 / (1.0 + (-m.array()).exp())).matrix(); }, x);
  check_unary([](Var a) { return softplus(a); }, [](const Matrix& m) -> Matrix { return (1.0 + m.array().exp()).log().matrix(); }, x);
  check_unary([](Var a) { return tanh(a); }, [](const Matrix& m) -> Matrix { return m.array().tanh().matrix(); }, x);
  check_unary([](Var a) { return exp(a); }, [](const Matrix& m) -> Matrix { return m.array().exp().matrix(); }, x);
  check_unary([](Var a) { return log(a); }, [](const Matrix& m) -> Matrix { return m.array().log().matrix(); }, pos);
  check_unary([](Var a) { return sqrt(a); }, [](const Matrix& m) -> Matrix { return m.array().sqrt().matrix(); }, pos);
  check_unary([](Var a) { return 2.0 / a; }, [](const Matrix& m) -> Matrix { return (2.0 / m.array()).matrix(); }, pos);
  const Matrix w = random_matrix(r, 3, 3);
  check_unary([&](Var a) { return square(softmax(a)); },
              [](const Matrix& m) -> Matrix {
                Matrix e = m.array().exp();
                for (Eigen::Index c = 0; c < e.cols(); ++c) e.col(c) /= e.col(c).sum();
                return e.array().square();
              },
              x);
  check_unary([&](Var a) { return matmul(a.tape->constant(w), a); }, [&](const Matrix& m) -> Matrix { return w * m; }, x);
  check_unary([](Var a) { return square(sum_rows(a)); },
              [](const Matrix& m) -> Matrix { return m.colwise().sum().array().square(); }, x);
}

TEST(Tape, SoftplusIsStableForLargeInputs) {
  Tape tape;
  Matrix x(1, 3);
  x << -800.0, 0.0, 800.0;
  const Var p = tape.parameter(x);
  const Var s = softplus(p);
  EXPECT_NEAR(s.value()(0, 0), 0.0, 1e-300);
  EXPECT_NEAR(s.value()(0, 1), std::log(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(s.value()(0, 2), 800.0);
  tape.backward(sum(s));
  EXPECT_NEAR(tape.grad(p)(0, 1), 0.5, 1e-15);
  EXPECT_TRUE(tape.grad(p).allFinite());
}

TEST(Tape, ComplexOpsMatchEigen) {
  Rng r(7);
  const Eigen::MatrixXcd c = Eigen::MatrixXcd::Random(4, 3);
  const Eigen::MatrixXcd a = Eigen::MatrixXcd::Random(3, 2);
  Tape tape;
  const CVar av{tape.parameter(a.real()), tape.parameter(a.imag())};
  const CVar prod = cmatmul(c, av);
  const Eigen::MatrixXcd expect = c * a;
  EXPECT_TRUE(prod.re.value().isApprox(expect.real()));
  EXPECT_TRUE(prod.im.value().isApprox(expect.imag()));
  const Var p2 = sum(abs2(prod));
  tape.backward(p2);
  // d/d conj(a) of ||C a||^2 = C^H C a; real gradient = 2 Re, 2 Im.
  const Eigen::MatrixXcd g = 2.0 * c.adjoint() * c * a;
  EXPECT_TRUE(tape.grad(av.re).isApprox(g.real(), 1e-12));
  EXPECT_TRUE(tape.grad(av.im).isApprox(g.imag(), 1e-12));
}

TEST(Adam, ZeroGradientLeavesParams) {
  Matrix p = Matrix::Constant(2, 3, 1.5);
  const Matrix before = p;
  std::vector<Matrix*> ps{&p};
  AdamState s({}, ps);
  const std::vector<Matrix> g{Matrix::Zero(2, 3)};
  s.update(ps, g);
  EXPECT_EQ(p, before);
  EXPECT_EQ(s.step(), 1);
}

TEST(Adam, FirstStepAlgebra) {
  Matrix p = Matrix::Constant(1, 1, 2.0);
  std::vector<Matrix*> ps{&p};
  AdamState s({}, ps);
  s.update(ps, std::vector<Matrix>{Matrix::Ones(1, 1)});
  EXPECT_NEAR(p(0, 0), 2.0 - 0.01 / (1.0 + 1e-8), 1e-15);
}

TEST(Adam, QuadraticBowlConverges) {
  Matrix p(2, 1);
  p << 3.0, -2.0;
  const Eigen::Vector2d target(0.5, 1.0);
  std::vector<Matrix*> ps{&p};
  AdamState s(AdamConfig{.learning_rate = 0.05}, ps);
  for (int i = 0; i < 500; ++i) s.update(ps, std::vector<Matrix>{2.0 * (p - target)});
  EXPECT_LT((p - target).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Adam, ShapeMismatchThrows) {
  Matrix p = Matrix::Zero(2, 2);
  std::vector<Matrix*> ps{&p};
  AdamState s({}, ps);
  EXPECT_THROW(s.update(ps, std::vector<Matrix>{Matrix::Zero(3, 2)}), std::invalid_argument);
  EXPECT_THROW(s.update(ps, std::vector<Matrix>{}), std::invalid_argument);
}

TEST(Checkpoint, RoundTripAndLayout) {
  Rng r(8);
  std::vector<Mlp> nets{Mlp::init(r, {2, 3, 1}, Activation::Sigmoid), Mlp::init(r, {1, 2}, Activation::Linear)};
  std::ostringstream out;
  write_networks(out, nets);
  const std::string bytes = out.str();
  EXPECT_EQ(bytes.substr(0, 8), "ISACAE01");
  // magic + (u32 L=2, 3 dims) + 13 doubles + (u32 L=1, 2 dims) + 4 doubles
  EXPECT_EQ(bytes.size(), 8u + 16 + 13 * 8 + 12 + 4 * 8);
  std::uint32_t first = 0;
  std::memcpy(&first, bytes.data() + 8, 4);
  EXPECT_EQ(first, 2u);
  double w00 = 0.0;
  std::memcpy(&w00, bytes.data() + 8 + 16, 8);
  EXPECT_EQ(w00, nets[0].weights[0](0, 0));
  double w01 = 0.0;
  std::memcpy(&w01, bytes.data() + 8 + 16 + 8, 8);
  EXPECT_EQ(w01, nets[0].weights[0](0, 1));  // row-major

  std::istringstream in(bytes);
  const std::vector<Activation> acts{Activation::Sigmoid, Activation::Linear};
  EXPECT_EQ(read_networks(in, acts), nets);
}

TEST(Checkpoint, RejectsCorruptInput) {
  const std::vector<Activation> acts{Activation::Linear};
  std::istringstream bad_magic("NOTMAGIC");
  EXPECT_THROW(read_networks(bad_magic, acts), std::runtime_error);
  Rng r(9);
  std::vector<Mlp> nets{Mlp::init(r, {2, 2}, Activation::Linear)};
  std::ostringstream out;
  write_networks(out, nets);
  std::istringstream truncated(out.str().substr(0, out.str().size() - 3));
  EXPECT_THROW(read_networks(truncated, acts), std::runtime_error);
}
