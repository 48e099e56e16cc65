#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "par/objectives.hpp"
#include "par/ops.hpp"

using namespace par;
using num::Tape;
using num::Var;

namespace {

const double kLn5 = std::log(5.0);
const double kLn2 = std::log(2.0);

Var log_uniform(Tape& tape, Index rows) {
  return tape.constant(Matrix::Constant(rows, kNumClasses, -kLn5));
}

// Log of a (nearly) one-hot distribution at `cls` with saturation `margin`.
Matrix saturated(const std::vector<int>& classes, double margin) {
  Matrix logits = Matrix::Zero(static_cast<Index>(classes.size()), kNumClasses);
  for (std::size_t i = 0; i < classes.size(); ++i) logits(static_cast<Index>(i), classes[i]) = margin;
  Tape tape;
  return num::row_log_softmax(tape.constant(logits)).value();
}

Hin pair_graph() {
  Hin h;
  h.add_node(NodeKind::legislator, "a");
  h.add_node(NodeKind::party, "p");
  h.add_edge(0, 1, RelationKind::party_affiliation);
  return h;
}

}  // namespace

TEST(ExpertLoss, UniformPredictionsCostLn5PerLabel) {
  Tape tape;
  const Var lu = log_uniform(tape, 5);
  const std::vector<ExpertLabel> one{{0, Side::liberal, 3}};
  EXPECT_NEAR(expert_loss(lu, lu, one).scalar(), kLn5, 1e-12);
  const std::vector<ExpertLabel> five{{0, Side::liberal, 0}, {1, Side::liberal, 4}, {2, Side::conservative, 1},
                                      {3, Side::conservative, 2}, {4, Side::conservative, 3}};
  EXPECT_NEAR(expert_loss(lu, lu, five).scalar(), 5 * kLn5, 1e-12);
}

TEST(ExpertLoss, PerfectPredictionsCostNothing) {
  Tape tape;
  const Var lib = tape.constant(saturated({2, 4}, 800.0));
  const Var con = tape.constant(saturated({1, 0}, 800.0));
  const std::vector<ExpertLabel> labels{{0, Side::liberal, 2}, {1, Side::liberal, 4}, {0, Side::conservative, 1},
                                        {1, Side::conservative, 0}};
  EXPECT_NEAR(expert_loss(lib, con, labels).scalar(), 0.0, 1e-300);
}

TEST(ExpertLoss, EmptyLabelsGiveZeroAndBadClassesThrow) {
  Tape tape;
  const Var lu = log_uniform(tape, 2);
  EXPECT_EQ(expert_loss(lu, lu, {}).scalar(), 0.0);
  const std::vector<ExpertLabel> bad{{0, Side::liberal, 5}};
  EXPECT_THROW(expert_loss(lu, lu, bad), LossError);
}

TEST(Consistency, ReversalIsAnInvolution) {
  for (int k = 0; k < kNumClasses; ++k) {
    EXPECT_EQ(reverse_class(reverse_class(k)), k);
    EXPECT_EQ(reverse_class(k), 4 - k);
  }
}

TEST(Consistency, LabelsReverseTheOtherSidesArgmax) {
  Matrix lib = Matrix::Zero(3, 5), con = Matrix::Zero(3, 5);
  con(0, 4) = 1;
  con(1, 2) = 1;
  con(2, 1) = 1;
  lib(0, 0) = 1;
  lib(1, 3) = 1;
  lib(2, 4) = 1;
  const auto t = consistency_labels(lib, con);
  EXPECT_EQ(t.liberal, (std::vector<int>{0, 2, 3}));
  EXPECT_EQ(t.conservative, (std::vector<int>{4, 1, 0}));
}

TEST(Consistency, ArgmaxTiesGoToTheLowerIndex) {
  Matrix m = Matrix::Constant(1, 5, 0.2);
  EXPECT_EQ(row_argmax(m), std::vector<int>{0});
  m(0, 3) = 0.3;
  m(0, 4) = 0.3;
  EXPECT_EQ(row_argmax(m), std::vector<int>{3});
}

TEST(Consistency, SaturatedConsistentPredictionsCostNothing) {
  Tape tape;
  const Var lib = tape.constant(saturated({0, 1, 2, 3, 4}, 40.0));
  const Var con = tape.constant(saturated({4, 3, 2, 1, 0}, 40.0));
  const std::vector<EntityId> e{0, 1, 2, 3, 4};
  EXPECT_LT(consistency_loss(lib, con, e).scalar(), 1e-6);
}

TEST(Consistency, UniformPredictionsAndScaling) {
  Tape tape;
  const Var lu = log_uniform(tape, 4);
  const std::vector<EntityId> one{0};
  EXPECT_NEAR(consistency_loss(lu, lu, one).scalar(), 2 * kLn5, 1e-12);
  const std::vector<EntityId> three{0, 1, 2};
  EXPECT_NEAR(consistency_loss(lu, lu, three).scalar(), 3 * 2 * kLn5, 1e-12);
  EXPECT_EQ(consistency_loss(lu, lu, {}).scalar(), 0.0);
}

TEST(Consistency, TargetsCarryNoGradient) {
  // d/dlogits of -log softmax(l)[t] is softmax(l) - onehot(t) with t held fixed.
  Tape tape;
  Matrix logits(1, 5);
  logits << 0.1, 0.4, -0.3, 0.2, 0.0;
  const Var l = tape.parameter(logits);
  const Var c = tape.constant(saturated({1}, 5.0));
  const Var ll = num::row_log_softmax(l);
  tape.backward(consistency_loss(ll, num::row_log_softmax(c), std::vector<EntityId>{0}));
  Matrix expected = num::row_softmax(tape.constant(logits)).value();
  expected(0, 3) -= 1.0;
  EXPECT_LT((l.grad() - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Negatives, SamplingRules) {
  Hin h;
  const auto a = h.add_node(NodeKind::legislator, "a");
  const auto p = h.add_node(NodeKind::party, "p");
  for (int i = 0; i < 6; ++i) h.add_node(NodeKind::state, "s" + std::to_string(i));
  h.add_edge(a, p, RelationKind::party_affiliation);
  const auto s1 = sample_negatives(h, a, 2, 7, 3);
  ASSERT_TRUE(s1.has_value());
  EXPECT_EQ(s1->size(), 2u);
  EXPECT_NE((*s1)[0], (*s1)[1]);
  for (EntityId j : *s1) {
    EXPECT_NE(j, a);
    EXPECT_NE(j, p);
  }
  EXPECT_EQ(sample_negatives(h, a, 2, 7, 3), s1);
  // k beyond the pool returns the whole pool.
  EXPECT_EQ(sample_negatives(h, a, 50, 7, 3)->size(), 6u);
  // Draws vary across epochs for at least one of several epochs.
  bool varied = false;
  for (std::uint64_t e = 0; e < 10 && !varied; ++e) varied = sample_negatives(h, a, 2, 7, e) != s1;
  EXPECT_TRUE(varied);
  EXPECT_FALSE(sample_negatives(pair_graph(), 0, 2, 0).has_value());
}

TEST(Echo, OnePositivePairWithZeroDotCostsTwoLn2) {
  Tape tape;
  const Var x = tape.constant(Matrix::Zero(2, 3));
  EchoOptions o;
  EXPECT_NEAR(echo_loss(x, pair_graph(), o).scalar(), 2 * kLn2, 1e-10);
}

TEST(Echo, OneNegativePairWithZeroDotAddsTenthOfLn2) {
  Hin h;
  h.add_node(NodeKind::legislator, "a");
  h.add_node(NodeKind::party, "p");
  Tape tape;
  const Var x = tape.constant(Matrix::Zero(2, 3));
  EchoOptions o;
  o.negatives_per_anchor = 1;
  const std::vector<EntityId> anchor{0};
  EXPECT_NEAR(echo_loss(x, h, anchor, o).scalar(), 0.1 * kLn2, 1e-10);
}

TEST(Echo, AlignedPositivePairCostsNothing) {
  Tape tape;
  Matrix xv(2, 1);
  xv << 100.0, 100.0;
  const Var x = tape.constant(xv);
  EXPECT_NEAR(echo_loss(x, pair_graph(), EchoOptions{}).scalar(), 0.0, 1e-10);
}

TEST(Echo, MatchesDirectSumOnRandomGraph) {
  std::mt19937_64 rng(5);
  Hin h;
  for (int i = 0; i < 5; ++i) h.add_node(NodeKind::legislator, "l" + std::to_string(i));
  for (int i = 0; i < 3; ++i) h.add_node(NodeKind::state, "s" + std::to_string(i));
  for (EntityId i = 0; i < 5; ++i) h.add_edge(i, 5 + rng() % 3, RelationKind::home_state);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix xv(8, 3);
  for (Index i = 0; i < xv.size(); ++i) xv.data()[i] = n(rng);
  EchoOptions o;
  o.seed = 9;
  o.epoch = 2;
  double expected = 0.0;
  const auto ls = [](double z) { return -std::log1p(std::exp(-z)); };
  for (EntityId i = 0; i < 8; ++i) {
    for (EntityId j : h.positive_set(i)) expected -= ls(xv.row(static_cast<Index>(i)).dot(xv.row(static_cast<Index>(j))));
    const auto neg = sample_negatives(h, i, 2, 9, 2);
    if (neg)
      for (EntityId j : *neg) expected += -0.1 * ls(-xv.row(static_cast<Index>(i)).dot(xv.row(static_cast<Index>(j))));
  }
  Tape tape;
  EXPECT_NEAR(echo_loss(tape.constant(xv), h, o).scalar(), expected, 1e-12);
  EXPECT_GE(expected, 0.0);
}

TEST(Echo, NoEdgesMeansNoPositiveTerm) {
  Hin h;
  h.add_node(NodeKind::legislator, "a");
  Tape tape;
  EXPECT_EQ(echo_loss(tape.constant(Matrix::Ones(1, 2)), h, EchoOptions{}).scalar(), 0.0);
}

TEST(Total, WeightExamples) {
  Tape tape;
  const Var l1 = tape.constant(3.0), l2 = tape.constant(5.0), l3 = tape.constant(7.0);
  const Var w = tape.parameter(Matrix::Constant(2, 2, 2.0));
  const std::vector<Var> params{w};
  LossWeights only_expert{1, 0, 0, 0};
  EXPECT_DOUBLE_EQ(total_loss(tape, {l1, l2, l3}, only_expert, params).report.total, 3.0);
  LossWeights only_reg{0, 0, 0, 1};
  EXPECT_DOUBLE_EQ(total_loss(tape, {l1, l2, l3}, only_reg, params).report.total, 16.0);
  const LossWeights defaults;
  EXPECT_EQ(defaults.expert, 0.01);
  EXPECT_EQ(defaults.consistency, 0.2);
  EXPECT_EQ(defaults.echo, 1.0);
  EXPECT_EQ(defaults.l2, 1e-5);
  EXPECT_EQ(defaults.negative_weight, -0.1);
  EXPECT_EQ(defaults.negatives_per_anchor, 2u);
  const auto r = total_loss(tape, {l1, l2, l3}, defaults, params).report;
  EXPECT_NEAR(r.total, 0.01 * r.expert + 0.2 * r.consistency + 1.0 * r.echo + 1e-5 * r.l2, 1e-10);
  LossWeights negative{-1, 0, 0, 0};
  EXPECT_THROW(total_loss(tape, {l1, l2, l3}, negative, params), LossError);
}

TEST(Total, RegularizerGradientIsTwiceTheWeights) {
  Tape tape;
  Matrix wv(1, 3);
  wv << 1.0, -2.0, 0.5;
  const Var w = tape.parameter(wv);
  const std::vector<Var> params{w};
  LossWeights reg{0, 0, 0, 0.5};
  tape.backward(total_loss(tape, {}, reg, params).loss);
  EXPECT_LT((w.grad() - wv).cwiseAbs().maxCoeff(), 1e-15);
}
