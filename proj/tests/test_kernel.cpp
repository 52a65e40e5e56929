#include <gtest/gtest.h>

#include <cmath>

#include "lwt/adamw.hpp"
#include "lwt/errors.hpp"
#include "lwt/kernel.hpp"
#include "lwt/random.hpp"
#include "support.hpp"

namespace lwt {
namespace {

using test::fd_check;
using test::fd_check_layer;
using test::random_tensor;

// Direct loop implementation of valid cross-correlation.
Tensor naive_conv(const Tensor& x, const ConvLayer& l) {
  const std::size_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::size_t OH = H - l.kernel_h + 1, OW = W - l.kernel_w + 1;
  Tensor y(Shape{B, l.out_filters, OH, OW});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t f = 0; f < l.out_filters; ++f)
      for (std::size_t i = 0; i < OH; ++i)
        for (std::size_t j = 0; j < OW; ++j) {
          double s = l.bias[f];
          for (std::size_t c = 0; c < C; ++c)
            for (std::size_t r = 0; r < l.kernel_h; ++r)
              for (std::size_t q = 0; q < l.kernel_w; ++q)
                s += l.weights.at(f, c, r, q) * x.at(b, c, i + r, j + q);
          y.at(b, f, i, j) = s;
        }
  return y;
}

ConvLayer random_conv(std::size_t kh, std::size_t kw, std::size_t c,
                      std::size_t f, std::mt19937_64& rng) {
  ConvLayer l(kh, kw, c, f);
  l.weights = random_tensor(l.weights.shape(), rng);
  l.bias = random_tensor(l.bias.shape(), rng);
  return l;
}

struct ConvCase {
  std::size_t batch, channels, height, width, kh, kw, filters;
};

class ConvOracle : public ::testing::TestWithParam<ConvCase> {};

TEST_P(ConvOracle, ForwardMatchesLoops) {
  const ConvCase k = GetParam();
  std::mt19937_64 rng(11);
  const ConvLayer l = random_conv(k.kh, k.kw, k.channels, k.filters, rng);
  const Tensor x =
      random_tensor({k.batch, k.channels, k.height, k.width}, rng);
  const Tensor got = conv2d_forward(x, l);
  const Tensor want = naive_conv(x, l);
  ASSERT_EQ(got.shape(), want.shape());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_NEAR(got[i], want[i], 1e-12) << "at " << i;
  }
}

TEST_P(ConvOracle, GradientsMatchFiniteDifferences) {
  const ConvCase k = GetParam();
  std::mt19937_64 rng(12);
  ConvLayer l = random_conv(k.kh, k.kw, k.channels, k.filters, rng);
  Tensor x = random_tensor({k.batch, k.channels, k.height, k.width}, rng);
  const Tensor probe = random_tensor(conv2d_forward(x, l).shape(), rng);
  const ConvGradients g = conv2d_backward(x, l, probe);
  auto forward = [&] { return conv2d_forward(x, l); };
  EXPECT_LT(fd_check_layer(x, g.input, forward, probe), 1e-6);
  EXPECT_LT(fd_check_layer(l.weights, g.weights, forward, probe), 1e-6);
  EXPECT_LT(fd_check_layer(l.bias, g.bias, forward, probe), 1e-6);
}

// Shapes cover the vector-width tails and the trunk's two kernel layouts.
INSTANTIATE_TEST_SUITE_P(
    Shapes, ConvOracle,
    ::testing::Values(ConvCase{1, 1, 1, 20, 1, 5, 3},
                      ConvCase{2, 3, 4, 11, 2, 3, 5},
                      ConvCase{1, 1, 6, 70, 1, 16, 9},
                      ConvCase{1, 4, 5, 9, 5, 1, 4},
                      ConvCase{1, 2, 1, 40, 1, 10, 6},
                      ConvCase{1, 3, 3, 3, 3, 3, 2}));

TEST(Conv, SkippedInputGradientIsEmpty) {
  std::mt19937_64 rng(1);
  const ConvLayer l = random_conv(1, 3, 2, 2, rng);
  const Tensor x = random_tensor({1, 2, 1, 8}, rng);
  const ConvGradients g =
      conv2d_backward(x, l, Tensor(Shape{1, 2, 1, 6}, 1.0), false);
  EXPECT_TRUE(g.input.empty());
  EXPECT_EQ(g.weights.shape(), l.weights.shape());
}

TEST(Conv, RejectsMismatchedInput) {
  const ConvLayer l(1, 64, 1, 36);
  EXPECT_THROW(conv2d_forward(Tensor(Shape{1, 2, 64, 512}), l), DimensionError);
  EXPECT_THROW(conv2d_forward(Tensor(Shape{1, 1, 64, 10}), l), DimensionError);
  EXPECT_THROW(conv2d_forward(Tensor(Shape{1, 64, 512}), l), DimensionError);
}

TEST(Conv, TrunkShapes) {
  const ConvLayer temporal(1, 64, 1, 36);
  const Tensor a = conv2d_forward(Tensor(Shape{1, 1, 64, 512}), temporal);
  EXPECT_EQ(a.shape(), (Shape{1, 36, 64, 449}));
  const ConvLayer spatial(64, 1, 36, 36);
  EXPECT_EQ(conv2d_forward(a, spatial).shape(), (Shape{1, 36, 1, 449}));
}

TEST(Pool, ForwardFloorMode) {
  const Tensor x(Shape{1, 1, 1, 7}, {1, 2, 3, 4, 5, 6, 7});
  const Tensor y = avgpool_forward(x, {1, 3, 1, 3});
  ASSERT_EQ(y.shape(), (Shape{1, 1, 1, 2}));
  EXPECT_DOUBLE_EQ(y[0], 2.0);
  EXPECT_DOUBLE_EQ(y[1], 5.0);
}

TEST(Pool, WidthExamples) {
  EXPECT_EQ(pool_extent(449, 3, 3), 149u);
  EXPECT_EQ(pool_extent(134, 15, 15), 8u);
  EXPECT_EQ(pool_extent(2, 3, 3), 0u);
  EXPECT_THROW(avgpool_forward(Tensor(Shape{1, 1, 1, 2}), {1, 3, 1, 3}),
               DimensionError);
}

TEST(Pool, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  const AvgPoolLayer l{2, 3, 1, 2};
  Tensor x = random_tensor({2, 3, 5, 12}, rng);
  const Tensor probe = random_tensor(avgpool_forward(x, l).shape(), rng);
  const Tensor g = avgpool_backward(x.shape(), l, probe);
  EXPECT_LT(fd_check_layer(x, g, [&] { return avgpool_forward(x, l); }, probe),
            1e-6);
}

TEST(Dense, ForwardMatchesLoops) {
  std::mt19937_64 rng(4);
  FCLayer l(6, 3);
  l.weights = random_tensor(l.weights.shape(), rng);
  l.bias = random_tensor(l.bias.shape(), rng);
  const Tensor x = random_tensor({2, 3, 1, 2}, rng);
  const Tensor y = fc_forward(x, l);
  ASSERT_EQ(y.shape(), (Shape{2, 3}));
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t o = 0; o < 3; ++o) {
      double s = l.bias[o];
      for (std::size_t i = 0; i < 6; ++i) s += l.weights[o * 6 + i] * x[b * 6 + i];
      EXPECT_NEAR(y[b * 3 + o], s, 1e-14);
    }
  EXPECT_THROW(fc_forward(Tensor(Shape{1, 5}), l), DimensionError);
}

TEST(Dense, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(5);
  FCLayer l(8, 4);
  l.weights = random_tensor(l.weights.shape(), rng);
  l.bias = random_tensor(l.bias.shape(), rng);
  Tensor x = random_tensor({3, 8}, rng);
  const Tensor probe = random_tensor({3, 4}, rng);
  const FCGradients g = fc_backward(x, l, probe);
  auto forward = [&] { return fc_forward(x, l); };
  EXPECT_LT(fd_check_layer(x, g.input, forward, probe), 1e-6);
  EXPECT_LT(fd_check_layer(l.weights, g.weights, forward, probe), 1e-6);
  EXPECT_LT(fd_check_layer(l.bias, g.bias, forward, probe), 1e-6);
}

TEST(Elu, ValuesAndGradient) {
  const Tensor x(Shape{4}, {-2.0, -0.5, 0.0, 1.5});
  const Tensor y = elu(x);
  EXPECT_DOUBLE_EQ(y[0], std::expm1(-2.0));
  EXPECT_DOUBLE_EQ(y[2], 0.0);
  EXPECT_DOUBLE_EQ(y[3], 1.5);
  std::mt19937_64 rng(6);
  Tensor z = random_tensor({50}, rng, 3.0);
  const Tensor probe = random_tensor({50}, rng);
  const Tensor g = elu_backward(z, probe);
  EXPECT_LT(fd_check_layer(z, g, [&] { return elu(z); }, probe), 1e-6);
}

TEST(Softmax, RowsSumToOneAndShiftInvariant) {
  const Tensor a(Shape{2, 3}, {1.0, 2.0, 3.0, -1.0, 0.0, 1000.0});
  const Tensor p = softmax(a);
  EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-15);
  EXPECT_NEAR(p[5], 1.0, 1e-15);
  const Tensor b(Shape{1, 3}, {101.0, 102.0, 103.0});
  const Tensor q = softmax(b);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(q[i], p[i], 1e-15);
  EXPECT_THROW(softmax(Tensor(Shape{1, 1})), DimensionError);
}

TEST(CrossEntropy, ValuesAndGradient) {
  const std::vector<double> probs{0.25, 0.75};
  EXPECT_DOUBLE_EQ(cross_entropy(probs, 1), -std::log(0.75));
  EXPECT_NEAR(cross_entropy(std::vector<double>{0.0, 1.0}, 0),
              -std::log(kProbabilityFloor), 1e-9);
  EXPECT_THROW(cross_entropy(probs, 2), IndexError);

  std::mt19937_64 rng(7);
  Tensor logits = random_tensor({1, 5}, rng, 2.0);
  auto loss = [&] { return 0.7 * cross_entropy(softmax(logits).values(), 3); };
  Tensor g(Shape{1, 5});
  softmax_cross_entropy_grad(softmax(logits).values(), 3, 0.7, g.values());
  EXPECT_LT(fd_check(logits, g, loss), 1e-6);
}

TEST(Init, GlorotBoundsAndZeroBias) {
  std::mt19937_64 rng(8);
  ConvLayer l(1, 64, 1, 36);
  glorot_uniform_init(l, rng);
  const double bound = std::sqrt(6.0 / (64.0 + 36.0 * 64.0));
  double max_abs = 0.0;
  for (double v : l.weights.values()) max_abs = std::max(max_abs, std::abs(v));
  EXPECT_LE(max_abs, bound);
  EXPECT_GT(max_abs, 0.5 * bound);
  for (double v : l.bias.values()) EXPECT_EQ(v, 0.0);
}

// Textbook AdamW written independently of the library.
struct ReferenceAdamW {
  double lr, b1, b2, eps, wd, m = 0, v = 0;
  int t = 0;
  double step(double p, double g) {
    ++t;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    return p - lr * (mh / (std::sqrt(vh) + eps) + wd * p);
  }
};

TEST(AdamW, ZeroGradientIsPureDecay) {
  const AdamWConfig cfg;
  Tensor p(Shape{3}, {1.0, -2.0, 0.5});
  const Tensor before = p;
  AdamWState s(p, cfg);
  adamw_step(p, Tensor(Shape{3}), s);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(p[i], before[i] * (1.0 - cfg.lr * cfg.weight_decay));
  }
}

TEST(AdamW, TrajectoryMatchesReference) {
  AdamWConfig cfg;
  cfg.lr = 0.05;
  cfg.weight_decay = 0.1;
  Tensor p(Shape{1}, 1.5);
  AdamWState s(p, cfg);
  ReferenceAdamW ref{cfg.lr, cfg.beta1, cfg.beta2, cfg.epsilon, cfg.weight_decay};
  double q = 1.5;
  for (int k = 0; k < 10; ++k) {
    const double g = std::sin(1.0 + k) + 0.3 * p[0];
    adamw_step(p, Tensor(Shape{1}, g), s);
    q = ref.step(q, g);
    EXPECT_NEAR(p[0], q, 1e-10) << "step " << k;
  }
  EXPECT_EQ(s.step_count, 10u);
  EXPECT_THROW(adamw_step(p, Tensor(Shape{2}), s), DimensionError);
}

TEST(Seeds, DerivedStreamsAreStableAndDistinct) {
  EXPECT_EQ(derive_seed(7, "init"), derive_seed(7, "init"));
  EXPECT_NE(derive_seed(7, "init"), derive_seed(8, "init"));
  EXPECT_NE(derive_seed(7, "init"), derive_seed(7, "split"));
  EXPECT_NE(derive_seed(7, "shuffle", 0), derive_seed(7, "shuffle", 1));
}

TEST(Tensor, Basics) {
  EXPECT_THROW(Tensor(Shape{2, 0}), DimensionError);
  EXPECT_THROW(Tensor(Shape{2}, std::vector<double>{1.0}), DimensionError);
  Tensor a(Shape{2, 2}, 1.0);
  a += Tensor(Shape{2, 2}, 2.0);
  EXPECT_EQ(a[3], 3.0);
  EXPECT_THROW(a += Tensor(Shape{4}), DimensionError);
  EXPECT_EQ(a.reshaped({4}).shape(), Shape{4});
  EXPECT_THROW(a.reshape({3}), DimensionError);
  a[0] = std::nan("");
  EXPECT_FALSE(a.all_finite());
}

}  // namespace
}  // namespace lwt
