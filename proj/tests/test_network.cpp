#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "spder/network.hpp"
#include "spder/optim.hpp"

using namespace spder;

namespace {

MlpConfig small(ActivationSpec act, EncodingSpec enc = NoEncoding{}, std::uint64_t seed = 1) {
  MlpConfig c;
  c.in_dim = 2;
  c.hidden_width = 6;
  c.depth = 3;
  c.activation = act;
  c.encoding = enc;
  c.seed = seed;
  return c;
}

Matrix sample_coords(std::size_t n) {
  Matrix x(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = std::sin(0.7 * static_cast<double>(i) + 0.1);
    x(i, 1) = std::cos(1.3 * static_cast<double>(i));
  }
  return x;
}

}  // namespace

TEST(Network, ShapesAndParameterCount) {
  MlpConfig c = small(ActivationSpec::semiperiodic(DampingKind::SqrtAbs));
  const MlpParams p = init_mlp(c);
  ASSERT_EQ(p.layers.size(), 3u);
  EXPECT_EQ(p.layers[0].weight.rows(), 2u);
  EXPECT_EQ(p.layers[0].weight.cols(), 6u);
  EXPECT_EQ(p.layers[2].weight.cols(), 1u);
  EXPECT_EQ(p.parameter_count(), c.parameter_count());
  EXPECT_EQ(c.parameter_count(), (2 + 1) * 6 + (6 + 1) * 6 + (6 + 1) * 1u);
  c.encoding = PositionalEncoding{10};
  EXPECT_EQ(init_mlp(c).layers[0].weight.rows(), 42u);
}

TEST(Network, PaperScaleImageParameterCount) {
  MlpConfig c;
  c.hidden_width = 256;
  c.depth = 5;
  EXPECT_EQ(c.parameter_count(), 3u * 256 + 3u * 257 * 256 + 257u);
}

TEST(Network, InitIsSeedDeterministic) {
  const auto act = ActivationSpec::semiperiodic(DampingKind::SqrtAbs);
  EXPECT_EQ(init_mlp(small(act, NoEncoding{}, 5)), init_mlp(small(act, NoEncoding{}, 5)));
  EXPECT_NE(init_mlp(small(act, NoEncoding{}, 5)), init_mlp(small(act, NoEncoding{}, 6)));
}

TEST(Network, InitBounds) {
  MlpConfig c;
  c.hidden_width = 64;
  c.depth = 4;
  for (const auto act : {ActivationSpec::sine(), ActivationSpec::relu()}) {
    c.activation = act;
    const MlpParams p = init_mlp(c);
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
      const double fan_in = static_cast<double>(p.layers[l].weight.rows());
      double want = std::sqrt(6.0 / fan_in);
      if (act.is_periodic()) want = l == 0 ? 1.0 / fan_in : want / 30.0;
      double peak = 0.0;
      for (double w : p.layers[l].weight.data()) peak = std::max(peak, std::abs(w));
      EXPECT_LE(peak, want);
      if (p.layers[l].weight.size() > 100) {
        EXPECT_GT(peak, 0.9 * want);
      }
      for (double b : p.layers[l].bias) EXPECT_LE(std::abs(b), 1.0 / std::sqrt(fan_in));
    }
  }
}

TEST(Network, ZeroBiasInit) {
  MlpConfig c = small(ActivationSpec::sine());
  c.bias_init = BiasInit::Zero;
  for (const auto& l : init_mlp(c).layers)
    for (double b : l.bias) EXPECT_EQ(b, 0.0);
}

TEST(Network, PredictMatchesForward) {
  const MlpConfig c = small(ActivationSpec::semiperiodic(DampingKind::LogAbs), PositionalEncoding{3});
  const MlpParams p = init_mlp(c);
  const Matrix x = sample_coords(37);
  const Matrix a = forward(p, c, x).outputs, b = predict(p, c, x, 5);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.data()[i], b.data()[i], 1e-13);
}

TEST(Network, ParameterGradientMatchesFiniteDifference) {
  const Matrix x = sample_coords(9);
  Matrix y(9, 1);
  for (std::size_t i = 0; i < 9; ++i) y(i, 0) = 0.3 * std::sin(3.0 * static_cast<double>(i));
  for (const auto act : {ActivationSpec::relu(), ActivationSpec::sine(),
                         ActivationSpec::semiperiodic(DampingKind::SqrtAbs),
                         ActivationSpec::semiperiodic(DampingKind::Arctan)}) {
    const MlpConfig c = small(act, FourierFeatures{3, 1.0, 2}, 4);
    const MlpParams p = init_mlp(c);
    const auto fwd = forward(p, c, x);
    const auto lg = mse_loss_and_grad(fwd.outputs, y);
    const MlpParams g = backward(p, c, fwd.cache, lg.grad);
    EXPECT_LT(oracle::relative_error(g, oracle::fd_param_gradient(p, c, x, y)), 1e-6) << act.name();
  }
}

TEST(Network, InputGradientMatchesFiniteDifference) {
  const MlpConfig c = small(ActivationSpec::semiperiodic(DampingKind::SqrtAbs), PositionalEncoding{2}, 8);
  const MlpParams p = init_mlp(c);
  const Matrix x = sample_coords(5);
  const Matrix g = input_gradient(p, c, x);
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t d = 0; d < 2; ++d) {
      auto f = [&](double v) {
        Matrix xp = x;
        xp(r, d) = v;
        return forward(p, c, xp).outputs(r, 0);
      };
      const double h = 1e-6;
      const double fd = (-f(x(r, d) + 2 * h) + 8 * f(x(r, d) + h) - 8 * f(x(r, d) - h) + f(x(r, d) - 2 * h)) / (12 * h);
      EXPECT_NEAR(g(r, d), fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Network, ShapeErrors) {
  const MlpConfig c = small(ActivationSpec::sine());
  const MlpParams p = init_mlp(c);
  EXPECT_THROW(forward(p, c, Matrix(4, 3)), ShapeError);
  MlpConfig other = c;
  other.hidden_width = 7;
  EXPECT_THROW(forward(p, other, Matrix(4, 2)), ShapeError);
  MlpConfig two_out = c;
  two_out.out_dim = 2;
  EXPECT_THROW(input_gradient(init_mlp(two_out), two_out, Matrix(1, 2)), UnsupportedError);
}

TEST(Network, ConfigValidation) {
  MlpConfig c;
  c.depth = 1;
  EXPECT_THROW(c.validate(), ArgumentError);
  c = MlpConfig{};
  c.hidden_width = 0;
  EXPECT_THROW(init_mlp(c), ArgumentError);
}

TEST(Network, NonFiniteWeightRaises) {
  const MlpConfig c = small(ActivationSpec::sine());
  MlpParams p = init_mlp(c);
  p.layers[1].weight(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(forward(p, c, sample_coords(3)), NumericError);
}

TEST(Network, ZeroOutputGradientGivesZeroGradients) {
  const MlpConfig c = small(ActivationSpec::semiperiodic(DampingKind::SqrtAbs));
  const MlpParams p = init_mlp(c);
  const auto fwd = forward(p, c, sample_coords(4));
  const MlpParams g = backward(p, c, fwd.cache, Matrix(4, 1));
  EXPECT_EQ(g, MlpParams::zeros_like(p));
}

TEST(Network, PositiveReluNetworkIsLinearLeastSquares) {
  // all pre-activations positive: the network is y = x W0 W1 + b0 W1 + b1
  MlpConfig c;
  c.in_dim = 2;
  c.hidden_width = 3;
  c.depth = 2;
  c.activation = ActivationSpec::relu();
  MlpParams p = init_mlp(c);
  p.layers[0].weight = Matrix::from_rows({{0.5, 0.2, 0.1}, {0.3, 0.4, 0.6}});
  p.layers[0].bias = {2.0, 2.0, 2.0};
  p.layers[1].weight = Matrix::from_rows({{1.0}, {-0.5}, {0.25}});
  p.layers[1].bias = {0.1};
  const Matrix x = sample_coords(6);
  Matrix y(6, 1);
  for (std::size_t i = 0; i < 6; ++i) y(i, 0) = 0.2 * static_cast<double>(i);
  const auto fwd = forward(p, c, x);
  const auto lg = mse_loss_and_grad(fwd.outputs, y);
  const MlpParams g = backward(p, c, fwd.cache, lg.grad);
  // residual r_i = (2/n)(yhat_i - y_i); dL/dW1 = H^T r, dL/db1 = sum r, dL/dW0 = X^T r W1^T
  std::vector<double> r(6);
  for (std::size_t i = 0; i < 6; ++i) r[i] = 2.0 / 6.0 * (fwd.outputs(i, 0) - y(i, 0));
  double db1 = 0.0;
  for (double v : r) db1 += v;
  EXPECT_NEAR(g.layers[1].bias[0], db1, 1e-14);
  for (std::size_t j = 0; j < 3; ++j) {
    double dw1 = 0.0, db0 = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
      const double h = x(i, 0) * p.layers[0].weight(0, j) + x(i, 1) * p.layers[0].weight(1, j) + 2.0;
      dw1 += h * r[i];
      db0 += r[i] * p.layers[1].weight(j, 0);
    }
    EXPECT_NEAR(g.layers[1].weight(j, 0), dw1, 1e-14);
    EXPECT_NEAR(g.layers[0].bias[j], db0, 1e-14);
    for (std::size_t d = 0; d < 2; ++d) {
      double dw0 = 0.0;
      for (std::size_t i = 0; i < 6; ++i) dw0 += x(i, d) * r[i] * p.layers[1].weight(j, 0);
      EXPECT_NEAR(g.layers[0].weight(d, j), dw0, 1e-14);
    }
  }
}

TEST(Network, InputGradientOfAffinePathAndZeroWeights) {
  MlpConfig c;
  c.in_dim = 2;
  c.hidden_width = 2;
  c.depth = 2;
  c.activation = ActivationSpec::relu();
  MlpParams p = init_mlp(c);
  p.layers[0].weight = Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}});
  p.layers[0].bias = {5.0, 5.0};
  p.layers[1].weight = Matrix::from_rows({{0.7}, {-0.3}});
  const Matrix g = input_gradient(p, c, sample_coords(4));
  for (std::size_t r = 0; r < 4; ++r) {
    EXPECT_DOUBLE_EQ(g(r, 0), 0.7);
    EXPECT_DOUBLE_EQ(g(r, 1), -0.3);
  }
  for (auto& l : p.layers) l.weight = Matrix(l.weight.rows(), l.weight.cols());
  const Matrix z = input_gradient(p, c, sample_coords(4));
  for (double v : z.data()) EXPECT_EQ(v, 0.0);
}
