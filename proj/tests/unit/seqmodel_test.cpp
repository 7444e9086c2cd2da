// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "failseq/seqmodel.hpp"
#include "oracles.hpp"

using namespace failseq;

namespace {

DirectionParams zero_direction(std::size_t l, std::size_t n) {
  DirectionParams d;
  for (Matrix* w : {&d.w_forget, &d.w_remember, &d.w_update, &d.w_output}) *w = Matrix(l, l + n);
  for (Vector* b : {&d.b_forget, &d.b_remember, &d.b_update, &d.b_output}) b->assign(l, 0.0);
  return d;
}

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST(HyperParams, Validation) {
  HyperParams hp;
  EXPECT_NO_THROW(hp.validate());
  hp.embedding_size = 0;
  EXPECT_THROW(hp.validate(), std::invalid_argument);
  hp = {};
  hp.lstm_size = 0;
  EXPECT_THROW(hp.validate(), std::invalid_argument);
  hp = {};
  hp.dropout_rate = 1.0;
  EXPECT_THROW(hp.validate(), std::invalid_argument);
  hp = {};
  hp.learning_rate = 0.0;
  EXPECT_THROW(hp.validate(), std::invalid_argument);
}

TEST(HyperParams, ParseNames) {
  EXPECT_EQ(parse_lstm_type("bi"), LstmType::bidirectional);
  EXPECT_EQ(parse_lstm_type("standard"), LstmType::standard);
  EXPECT_THROW(parse_lstm_type("sideways"), std::invalid_argument);
  EXPECT_EQ(parse_optimizer("sgd"), OptimizerKind::sgd);
  EXPECT_THROW(parse_optimizer("rmsprop"), std::invalid_argument);
}

TEST(ParamCount, ShapeArithmetic) {
  HyperParams hp;
  hp.embedding_size = 3;
  hp.lstm_size = 6;
  hp.lstm_type = LstmType::standard;
  EXPECT_EQ(param_count(hp, 20), 4u * 6 * 9 + 24 + 63 + 7);
  EXPECT_EQ(param_count(hp, 20), 310u);
  hp.lstm_type = LstmType::bidirectional;
  EXPECT_EQ(param_count(hp, 20), 556u);

  Rng rng(1);
  EXPECT_EQ(init_params(hp, 20, rng).count(), 556u);

  hp.lstm_size = 1;
  hp.embedding_size = 0;
  EXPECT_THROW(param_count(hp, 20), std::invalid_argument);
}

TEST(InitParams, RangesBiasesAndDeterminism) {
  HyperParams hp;
  Rng r1(5), r2(5);
  const ModelParams p = init_params(hp, 20, r1);
  EXPECT_EQ(p, init_params(hp, 20, r2));
  EXPECT_EQ(p.embedding.rows(), 21u);
  ASSERT_EQ(p.directions.size(), 2u);
  for (const auto& d : p.directions) {
    for (const Matrix* w : {&d.w_forget, &d.w_remember, &d.w_update, &d.w_output}) {
      for (double v : w->data()) {
        EXPECT_GE(v, -0.08);
        EXPECT_LE(v, 0.08);
      }
    }
    for (double v : d.b_forget) EXPECT_EQ(v, 1.0);
    for (const Vector* b : {&d.b_remember, &d.b_update, &d.b_output})
      for (double v : *b) EXPECT_EQ(v, 0.0);
  }
  EXPECT_EQ(p.dense_b, 0.0);
}

TEST(LstmStep, ZeroParametersAreAFixpoint) {
  const DirectionParams d = zero_direction(3, 2);
  const StepResult r = lstm_step(Vector{0.7, -1.2}, {Vector(3, 0.0), Vector(3, 0.0)}, d);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(r.cache.forget[i], 0.5);
    EXPECT_EQ(r.cache.remember[i], 0.5);
    EXPECT_EQ(r.cache.output[i], 0.5);
    EXPECT_EQ(r.cache.update[i], 0.0);
    EXPECT_EQ(r.state.c[i], 0.0);
    EXPECT_EQ(r.state.h[i], 0.0);
  }
}

TEST(LstmStep, SaturatedUpdateGate) {
  DirectionParams d = zero_direction(2, 1);
  d.b_update.assign(2, 20.0);
  const StepResult r = lstm_step(Vector{0.3}, {Vector(2, 0.0), Vector(2, 0.0)}, d);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(r.state.c[i], 0.5, 1e-12);
    EXPECT_NEAR(r.state.h[i], 0.23106, 1e-5);
  }
}

TEST(LstmStep, MatchesScalarTranscription) {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    DirectionParams d = zero_direction(1, 1);
    double w[4][2], b[4];
    Matrix* ws[4] = {&d.w_forget, &d.w_remember, &d.w_update, &d.w_output};
    Vector* bs[4] = {&d.b_forget, &d.b_remember, &d.b_update, &d.b_output};
    for (int g = 0; g < 4; ++g) {
      w[g][0] = rng.uniform(-2, 2);
      w[g][1] = rng.uniform(-2, 2);
      b[g] = rng.uniform(-1, 1);
      (*ws[g])(0, 0) = w[g][0];
      (*ws[g])(0, 1) = w[g][1];
      (*bs[g])[0] = b[g];
    }
    const double h0 = rng.uniform(-1, 1), c0 = rng.uniform(-1, 1), x = rng.uniform(-1, 1);
    const double f = sig(w[0][0] * h0 + w[0][1] * x + b[0]);
    const double r = sig(w[1][0] * h0 + w[1][1] * x + b[1]);
    const double u = std::tanh(w[2][0] * h0 + w[2][1] * x + b[2]);
    const double o = sig(w[3][0] * h0 + w[3][1] * x + b[3]);
    const double c1 = f * c0 + r * u;
    const double h1 = o * std::tanh(c1);

    const StepResult res = lstm_step(Vector{x}, {Vector{h0}, Vector{c0}}, d);
    EXPECT_NEAR(res.state.c[0], c1, 1e-12);
    EXPECT_NEAR(res.state.h[0], h1, 1e-12);
  }
}

TEST(Forward, ZeroDenseLayerGivesHalf) {
  HyperParams hp;
  ModelParams p = testkit::random_params(hp, 20, 3, 0.5);
  std::fill(p.dense_w.begin(), p.dense_w.end(), 0.0);
  p.dense_b = 0.0;
  const Vocab v = Vocab::letters(20);
  EXPECT_EQ(predict_proba(v.parse("a f b c a"), p), 0.5);
  EXPECT_EQ(predict_proba(v.parse("c a f h f c e c k b f a b j e"), p), 0.5);
}

TEST(Forward, InferAndPredictAgree) {
  HyperParams hp;
  const ModelParams p = testkit::random_params(hp, 20, 4, 0.5);
  const std::vector<EventId> s{3, 1, 4, 1, 5, 9, 2, 6};
  const ForwardPass pass = forward_infer(s, p);
  EXPECT_EQ(pass.prob, predict_proba(s, p));
  EXPECT_GT(pass.prob, 0.0);
  EXPECT_LT(pass.prob, 1.0);
  EXPECT_EQ(pass.features.size(), 12u);
}

TEST(Forward, BidirectionalSymmetryOnPalindromes) {
  HyperParams hp;
  ModelParams p = testkit::random_params(hp, 20, 6, 0.5);
  p.directions[1] = p.directions[0];
  const std::vector<EventId> pal{2, 7, 3, 7, 2};
  const ForwardPass pass = forward_infer(pal, p);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(pass.features[i], pass.features[6 + i]);
}

TEST(Forward, BackwardDirectionSeesReversedSequence) {
  HyperParams hp;
  ModelParams p = testkit::random_params(hp, 20, 7, 0.5);
  p.directions[1] = p.directions[0];
  const std::vector<EventId> s{1, 2, 3}, rev{3, 2, 1};
  const ForwardPass a = forward_infer(s, p), b = forward_infer(rev, p);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(a.features[i], b.features[6 + i]);
    EXPECT_EQ(a.features[6 + i], b.features[i]);
  }
}

TEST(Forward, TrainModeDropoutIsSeeded) {
  HyperParams hp;
  const ModelParams p = testkit::random_params(hp, 20, 8, 0.5);
  const std::vector<EventId> s{1, 2, 3, 4};
  Rng r1(10), r2(10);
  const ForwardPass a = forward_train(s, p, hp, r1), b = forward_train(s, p, hp, r2);
  EXPECT_EQ(a.prob, b.prob);
  EXPECT_EQ(a.mask, b.mask);
  EXPECT_EQ(a.mask.size(), 12u);
}

TEST(Forward, RejectsBadInput) {
  HyperParams hp;
  Rng rng(1);
  const ModelParams p = init_params(hp, 20, rng);
  EXPECT_THROW(predict_proba(std::vector<EventId>{}, p), std::invalid_argument);
  EXPECT_THROW(predict_proba(std::vector<EventId>{21}, p), std::invalid_argument);
}

TEST(PredictLabel, Threshold) {
  EXPECT_EQ(predict_label(0.878), 1);
  EXPECT_EQ(predict_label(0.5), 1);
  EXPECT_EQ(predict_label(0.1), 0);
}
