#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "swarm_edge/dataset.hpp"
#include "swarm_edge/errors.hpp"
#include "swarm_edge/model.hpp"

using namespace swarm_edge;

namespace {

LabeledDataset small_blobs(int classes, int features, int per_class, std::uint64_t seed) {
  return synth_blobs(classes, features, per_class, 0.5, seed);
}

}  // namespace

TEST(Model, Dimensions) {
  EXPECT_EQ(Model::softmax_linear(3, 4).dim(), 3u * 4u + 3u);
  EXPECT_EQ(Model::mlp1(4, 5, 3).dim(), 5u * 4u + 5u + 3u * 5u + 3u);
  EXPECT_EQ(Model::quadratic(ParamVec{0.0, 1.0}, {1.0, 2.0}).dim(), 2u);
}

TEST(Model, InvalidFactoriesThrow) {
  EXPECT_THROW(Model::softmax_linear(1, 4), ConfigError);
  EXPECT_THROW(Model::softmax_linear(3, 0), ConfigError);
  EXPECT_THROW(Model::mlp1(4, 0, 3), ConfigError);
  EXPECT_THROW(Model::quadratic(ParamVec{0.0}, {1.0, 2.0}), ConfigError);
  EXPECT_THROW(Model::quadratic(ParamVec{0.0}, {0.0}), ConfigError);
}

TEST(Model, ZeroWeightsGiveLogC) {
  const LabeledDataset ds = small_blobs(4, 3, 5, 1);
  const Model m = Model::softmax_linear(4, 3);
  EXPECT_NEAR(loss_eval(m, ParamVec(m.dim()), ds.view()), std::log(4.0), 1e-15);
}

TEST(Model, SoftmaxHandValue) {
  // Two classes, one feature, one sample x=1, label 1.
  // logits = [w0 + b0, w1 + b1] = [0.5, -0.5]; loss = log(1 + e^{1}).
  const Model m = Model::softmax_linear(2, 1);
  const std::vector<double> x{1.0};
  const std::vector<int> y{1};
  const Batch b{x, y, 1};
  const ParamVec w{0.5, -0.5, 0.0, 0.0};
  EXPECT_NEAR(loss_eval(m, w, b), std::log1p(std::exp(1.0)), 1e-15);
  // d/dlogit = p - onehot, p = sigmoid-like [e/(1+e), 1/(1+e)].
  const double p0 = std::exp(1.0) / (1.0 + std::exp(1.0));
  const ParamVec g = grad_eval(m, w, b);
  EXPECT_NEAR(g[0], p0, 1e-15);
  EXPECT_NEAR(g[1], -p0, 1e-15);
  EXPECT_NEAR(g[2], p0, 1e-15);
  EXPECT_NEAR(g[3], -p0, 1e-15);
}

TEST(Model, QuadraticValueAndGradient) {
  const Model m = Model::quadratic(ParamVec{1.0, -1.0}, {2.0, 4.0});
  const ParamVec w{2.0, 1.0};
  const Batch empty{};
  EXPECT_DOUBLE_EQ(loss_eval(m, w, empty), 0.5 * (2.0 * 1.0 + 4.0 * 4.0));
  EXPECT_EQ(grad_eval(m, w, empty), (ParamVec{2.0, 8.0}));
}

TEST(Model, GradientMatchesFiniteDifferences) {
  const LabeledDataset ds = small_blobs(5, 6, 8, 11);
  EXPECT_LT(oracle::max_grad_rel_error(Model::softmax_linear(5, 6), ds.view(), 30, 1), 1e-6);
  EXPECT_LT(oracle::max_grad_rel_error(Model::mlp1(6, 7, 5), ds.view(), 30, 2), 1e-6);
  EXPECT_LT(oracle::max_grad_rel_error(Model::quadratic(ParamVec(6, 0.3), {1, 2, 3, 4, 5, 6}),
                                       ds.view(), 30, 3),
            1e-6);
}

TEST(Model, LossAndGradAgree) {
  const LabeledDataset ds = small_blobs(3, 4, 6, 5);
  const Model m = Model::mlp1(4, 3, 3);
  Rng rng = make_rng(2, Stream::kInit);
  const ParamVec w = m.init_params(rng);
  const LossGrad lg = loss_and_grad(m, w, ds.view());
  EXPECT_DOUBLE_EQ(lg.loss, loss_eval(m, w, ds.view()));
  EXPECT_EQ(lg.grad, grad_eval(m, w, ds.view()));
}

TEST(Model, TvPenaltyAddsProximalTerm) {
  const Model m = Model::quadratic(ParamVec{0.0, 0.0}, {1.0, 1.0});
  const ParamVec w{1.0, 2.0};
  const ParamVec anchor{0.0, 1.0};
  const LossGrad lg = tv_loss_grad(m, w, Batch{}, anchor, 0.5);
  EXPECT_DOUBLE_EQ(lg.loss, 2.5 + 0.25 * 2.0);
  EXPECT_EQ(lg.grad, (ParamVec{1.5, 2.5}));
  EXPECT_THROW(tv_loss_grad(m, w, Batch{}, anchor, -1.0), ConfigError);
  const LossGrad plain = tv_loss_grad(m, w, Batch{}, anchor, 0.0);
  EXPECT_EQ(plain.grad, grad_eval(m, w, Batch{}));
}

TEST(Model, StableForHugeLogits) {
  const Model m = Model::softmax_linear(2, 1);
  const std::vector<double> x{1.0};
  const std::vector<int> y{0};
  const Batch b{x, y, 1};
  const ParamVec w{1000.0, -1000.0, 0.0, 0.0};
  EXPECT_NEAR(loss_eval(m, w, b), 0.0, 1e-300);
  const ParamVec bad{-1000.0, 1000.0, 0.0, 0.0};
  EXPECT_NEAR(loss_eval(m, bad, b), 2000.0, 1e-9);
}

TEST(Model, InputValidation) {
  const Model m = Model::softmax_linear(3, 2);
  const std::vector<double> x{1.0, 2.0};
  const std::vector<int> y{0};
  EXPECT_THROW(loss_eval(m, ParamVec(m.dim() + 1), Batch{x, y, 2}), ConfigError);
  EXPECT_THROW(loss_eval(m, ParamVec(m.dim()), Batch{}), ConfigError);
  const std::vector<int> bad_label{3};
  EXPECT_THROW(loss_eval(m, ParamVec(m.dim()), Batch{x, bad_label, 2}), ConfigError);
  const std::vector<double> x3{1.0, 2.0, 3.0};
  EXPECT_THROW(loss_eval(m, ParamVec(m.dim()), Batch{x3, y, 3}), ConfigError);
  EXPECT_THROW(accuracy(Model::quadratic(ParamVec{0.0}, {1.0}), ParamVec{0.0}, Batch{}),
               ConfigError);
}

TEST(Model, NonFiniteParamsRaiseNumericError) {
  const Model m = Model::softmax_linear(2, 1);
  const std::vector<double> x{1.0};
  const std::vector<int> y{0};
  const ParamVec w{std::nan(""), 0.0, 0.0, 0.0};
  EXPECT_THROW(loss_eval(m, w, Batch{x, y, 1}), NumericError);
}

TEST(Model, AccuracyTieGoesToLowestClass) {
  const Model m = Model::softmax_linear(3, 1);
  const std::vector<double> x{1.0, 1.0};
  const std::vector<int> y{0, 1};
  EXPECT_DOUBLE_EQ(accuracy(m, ParamVec(m.dim()), Batch{x, y, 1}), 0.5);
}

TEST(Model, InitIsSeededAndSmall) {
  const Model m = Model::mlp1(8, 4, 3);
  Rng a = make_rng(9, Stream::kInit), b = make_rng(9, Stream::kInit);
  const ParamVec wa = m.init_params(a);
  EXPECT_EQ(wa, m.init_params(b));
  EXPECT_TRUE(all_finite(wa));
  EXPECT_LT(norm2(wa), 10.0);
}

TEST(Model, CentralizedTrainingSeparatesBlobs) {
  // 100 training samples per class; short full-batch descent, before the
  // 64-d fit starts to memorize.
  for (std::uint64_t seed : {21u, 31u, 41u}) {
    const LabeledDataset all = synth_blobs(10, 64, 200, 0.3, seed);
    const auto [train, test] = stratified_holdout(all, 100, seed + 1);
    const Model m = Model::softmax_linear(10, 64);
    ParamVec w(m.dim());
    for (int it = 0; it < 50; ++it) axpy(-2.0, grad_eval(m, w, train.view()), w);
    EXPECT_GE(accuracy(m, w, test.view()), 0.9) << "seed " << seed;
  }
}

TEST(Model, ConvergedRunOnSeparableBlobsIsAccurate) {
  const LabeledDataset all = synth_blobs(4, 8, 60, 0.05, 23);
  const auto [train, test] = stratified_holdout(all, 20, 24);
  const Model m = Model::mlp1(8, 16, 4);
  Rng rng = make_rng(1, Stream::kInit);
  ParamVec w = m.init_params(rng);
  for (int it = 0; it < 500; ++it) axpy(-0.5, grad_eval(m, w, train.view()), w);
  EXPECT_GE(accuracy(m, w, test.view()), 0.95);
}
