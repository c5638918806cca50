#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "stresscast/nn/model.hpp"

using namespace stresscast;
using namespace stresscast::nn;

TEST(Architecture, DefaultsAndMinimumLength) {
  const Architecture a;
  EXPECT_EQ(a.in_channels, 4u);
  EXPECT_EQ(a.min_length(), 32u);
  EXPECT_EQ(a.hash(), Architecture{}.hash());
  Architecture b = a;
  b.head_width = 16;
  EXPECT_NE(a.hash(), b.hash());
  EXPECT_NE(a.describe(), b.describe());
}

TEST(Initialize, HeUniformBoundsAndZeroBiases) {
  const auto p = ModelParams::initialize(Architecture{}, 7);
  const auto q = ModelParams::initialize(Architecture{}, 7);
  EXPECT_TRUE(p.same_values(q));
  EXPECT_FALSE(p.same_values(ModelParams::initialize(Architecture{}, 8)));
  for (const auto& layer : p.encoder) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.weight.dim(1) * layer.weight.dim(2)));
    for (double v : layer.weight.values()) EXPECT_LE(std::abs(v), bound);
    for (double v : layer.bias.values()) EXPECT_EQ(v, 0.0);
  }
  EXPECT_EQ(p.head_bias[0], 0.0);
  EXPECT_EQ(p.tensor_names().size(), p.all_tensors().size());
}

TEST(Forward, ShapesThroughTheNetwork) {
  oracle::Gen g(1);
  const auto p = ModelParams::initialize(Architecture{}, 1);
  for (std::size_t len : {32u, 33u, 240u, 241u, 1200u}) {
    const Tensor x = g.tensor({4, len});
    EXPECT_EQ(encode(p, x).shape(), (std::vector<std::size_t>{64, (len + 7) / 8}));
    EXPECT_EQ(reconstruct(p, x).shape(), x.shape());
    EXPECT_TRUE(std::isfinite(classifier_logit(p, x)));
  }
}

TEST(Forward, RejectsBadInput) {
  const auto p = ModelParams::initialize(Architecture{}, 1);
  EXPECT_THROW(classifier_logit(p, Tensor({3, 240})), ValidationError);
  EXPECT_THROW(classifier_logit(p, Tensor({4, 16})), ValidationError);
}

TEST(ClassifierForward, ZeroHeadGivesOneHalf) {
  oracle::Gen g(2);
  auto p = ModelParams::initialize(Architecture{}, 3);
  std::fill(p.head_weight.values().begin(), p.head_weight.values().end(), 0.0);
  std::vector<Tensor> batch{g.tensor({4, 64}), g.tensor({4, 64})};
  for (double prob : classifier_forward(p, batch)) EXPECT_EQ(prob, 0.5);
}

TEST(ClassifierForward, ProbabilitiesInOpenIntervalAndDeterministic) {
  oracle::Gen g(3);
  const auto p = ModelParams::initialize(Architecture{}, 4);
  std::vector<Tensor> batch;
  for (int i = 0; i < 6; ++i) batch.push_back(g.tensor({4, 64}, -5.0, 5.0));
  const auto a = classifier_forward(p, batch);
  EXPECT_EQ(a, classifier_forward(p, batch));
  for (double v : a) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(AutoencoderLoss, NonNegativeAndZeroAtPerfectReconstruction) {
  oracle::Gen g(4);
  auto p = ModelParams::initialize(Architecture{}, 5);
  std::vector<Tensor> batch{g.tensor({4, 64})};
  EXPECT_GE(autoencoder_batch_loss(p, batch, false), 0.0);
  // All-zero windows through a decoder whose last layer is zero reconstruct exactly.
  std::fill(p.decoder[2].weight.values().begin(), p.decoder[2].weight.values().end(), 0.0);
  std::vector<Tensor> zeros{Tensor({4, 64}), Tensor({4, 64})};
  EXPECT_EQ(autoencoder_batch_loss(p, zeros, false), 0.0);
}

TEST(ClassifierLoss, AccumulateMatchesConstOverload) {
  oracle::Gen g(5);
  auto p = ModelParams::initialize(Architecture{}, 6);
  std::vector<Tensor> batch{g.tensor({4, 40}), g.tensor({4, 40})};
  std::vector<double> labels{1.0, 0.0};
  const double a = classifier_batch_loss(static_cast<const ModelParams&>(p), batch, labels);
  const double b = classifier_batch_loss(p, batch, labels, true);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(p.encoder[0].weight.has_grad());
  p.zero_grad();
  classifier_batch_loss(p, batch, labels, true, false);
  for (double v : p.encoder[0].weight.grad()) EXPECT_EQ(v, 0.0);
}
