#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "advbot/detector/model.hpp"
#include "advbot/detector/ops.hpp"
#include "advbot/diffcore/gradcheck.hpp"
#include "support/fixtures.hpp"

using namespace advbot;
using namespace advbot::detector;
using corpus::ConversationPair;
using corpus::TokenSeq;

namespace {

DetectorConfig small_cfg() {
  DetectorConfig c;
  c.embed_dim = 4;
  c.hidden_dim = 5;
  c.init_scale = 0.4;
  return c;
}

// Responses drawn from disjoint halves of the vocabulary per class.
std::vector<ConversationPair> pairs_from(Rng& rng, corpus::TokenId lo, std::size_t span, std::size_t n) {
  std::vector<ConversationPair> out;
  for (std::size_t i = 0; i < n; ++i) {
    ConversationPair p;
    p.source.ids = {static_cast<corpus::TokenId>(4 + rng.below(8))};
    for (std::size_t k = 0, len = 1 + rng.below(4); k < len; ++k) {
      p.target.ids.push_back(static_cast<corpus::TokenId>(lo + rng.below(span)));
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace

TEST(DetectorForward, ZeroModelScoresHalf) {
  const auto v = advbot::testing::small_vocab(5);
  const auto m = DetectorModel::zeros(v, small_cfg());
  EXPECT_EQ(probability_human(m, ConversationPair{TokenSeq{{4}}, TokenSeq{{5, 6}}, "", ""}), 0.5);
  EXPECT_EQ(score(m, ConversationPair{TokenSeq{{4}}, TokenSeq{{5}}, "", ""}).predicted_label, corpus::Label::human);
}

TEST(DetectorForward, OrderOfResponseMatters) {
  const auto v = advbot::testing::small_vocab(5);
  const DetectorModel m(v, small_cfg(), 2);
  const double a = probability_human(m, ConversationPair{TokenSeq{{4}}, TokenSeq{{5, 6, 7}}, "", ""});
  const double b = probability_human(m, ConversationPair{TokenSeq{{4}}, TokenSeq{{7, 6, 5}}, "", ""});
  EXPECT_NE(a, b);
  // Context also matters.
  const double c = probability_human(m, ConversationPair{TokenSeq{{8}}, TokenSeq{{5, 6, 7}}, "", ""});
  EXPECT_NE(a, c);
}

TEST(DetectorForward, DeterministicAndThreadInvariant) {
  const auto v = advbot::testing::small_vocab(6);
  const DetectorModel m(v, small_cfg(), 3);
  Rng rng(1);
  std::vector<ConversationPair> pairs;
  for (int i = 0; i < 40; ++i) pairs.push_back(advbot::testing::random_pair(rng, *v));
  const auto one = score_all(m, pairs, 1);
  EXPECT_EQ(one, score_all(m, pairs, 1));
  EXPECT_EQ(one, score_all(m, pairs, 4));
  for (double p : one) {
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
}

TEST(DetectorForward, EmptySequencesRejected) {
  const auto v = advbot::testing::small_vocab(3);
  const DetectorModel m(v, small_cfg(), 1);
  EXPECT_THROW(probability_human(m, ConversationPair{TokenSeq{{4}}, TokenSeq{}, "", ""}), corpus::EmptySequenceError);
  EXPECT_THROW(probability_human(m, ConversationPair{TokenSeq{}, TokenSeq{{4}}, "", ""}), corpus::EmptySequenceError);
}

TEST(DetectorForward, HeadOnlyModelMatchesLogisticOracle) {
  // Only the head bias is non-zero: p = sigmoid(b) for any input.
  const auto v = advbot::testing::small_vocab(3);
  auto m = DetectorModel::zeros(v, small_cfg());
  m.head_bias.value[0] = 1.3;
  EXPECT_NEAR(probability_human(m, ConversationPair{TokenSeq{{4}}, TokenSeq{{5}}, "", ""}),
              1.0 / (1.0 + std::exp(-1.3)), 1e-15);
}

TEST(DetectorLoss, BinaryCrossEntropyValues) {
  EXPECT_EQ(binary_cross_entropy(std::vector<double>{1.0, 0.0}, std::vector<int>{1, 0}), 0.0);
  EXPECT_NEAR(binary_cross_entropy(std::vector<double>{0.5, 0.5}, std::vector<int>{1, 0}), std::log(2.0), 1e-15);
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const double p = rng.uniform(0.001, 0.999);
    const int y = static_cast<int>(rng.below(2));
    const double oracle = y == 1 ? -std::log(p) : -std::log(1.0 - p);
    EXPECT_NEAR(binary_cross_entropy(std::vector<double>{p}, std::vector<int>{y}), oracle, 1e-12);
    const double z = std::log(p / (1.0 - p));
    EXPECT_NEAR(example_loss(z, y == 1 ? corpus::Label::human : corpus::Label::bot), oracle, 1e-12);
  }
  EXPECT_THROW(binary_cross_entropy(std::vector<double>{}, std::vector<int>{}), std::invalid_argument);
}

TEST(DetectorLoss, TapeLossEqualsForwardLoss) {
  const auto v = advbot::testing::small_vocab(5);
  DetectorModel m(v, small_cfg(), 5);
  Rng rng(5);
  std::vector<corpus::LabeledExample> batch;
  for (int i = 0; i < 6; ++i) {
    batch.push_back(as_example(advbot::testing::random_pair(rng, *v), i % 2 ? corpus::Label::human : corpus::Label::bot));
  }
  diff::Tape t;
  EXPECT_NEAR(detector_loss(t, m, batch).value().item(), detector_loss(m, batch), 1e-12);
}

TEST(DetectorLoss, GradientsMatchFiniteDifferences) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto v = advbot::testing::small_vocab(4);
    DetectorModel m(v, small_cfg(), seed);
    Rng rng(seed);
    std::vector<corpus::LabeledExample> batch;
    for (int i = 0; i < 4; ++i) {
      batch.push_back(
          as_example(advbot::testing::random_pair(rng, *v), i % 2 ? corpus::Label::human : corpus::Label::bot));
    }
    const auto r = diff::finite_difference_check([&](diff::Tape& t) { return detector_loss(t, m, batch); },
                                                 m.parameters(), 1e-4, 1e-6);
    EXPECT_LT(r.max_rel_error, 1e-4) << r.worst_param << "[" << r.worst_index << "]";
  }
}

TEST(DetectorTraining, PretrainSeparatesDisjointVocabularies) {
  const auto v = advbot::testing::small_vocab(12);
  Rng rng(6);
  const auto real = pairs_from(rng, 4, 6, 200);   // w0..w5
  const auto fake = pairs_from(rng, 10, 6, 200);  // w6..w11
  DetectorModel m(v, small_cfg(), 6);
  DetectorTrainConfig cfg;
  cfg.steps = 150;
  cfg.batch_size = 16;
  cfg.optimizer = diff::OptimizerConfig::adam(0.01);
  cfg.seed = 6;
  const auto trace = pretrain_detector(m, real, std::span<const ConversationPair>(fake), cfg);
  ASSERT_FALSE(trace.aborted);
  EXPECT_EQ(trace.losses.size(), 150u);
  EXPECT_LT(trace.losses.back(), trace.losses.front());

  std::vector<corpus::LabeledExample> test;
  for (const auto& p : pairs_from(rng, 4, 6, 50)) test.push_back(as_example(p, corpus::Label::human));
  for (const auto& p : pairs_from(rng, 10, 6, 50)) test.push_back(as_example(p, corpus::Label::bot));
  const auto ev = evaluate(m, test);
  EXPECT_EQ(ev.n, 100u);
  EXPECT_GE(ev.accuracy, 0.95);
  ASSERT_TRUE(ev.auc.has_value());
  EXPECT_GE(*ev.auc, 0.98);
  EXPECT_GT(*ev.mean_prob_human, *ev.mean_prob_bot);
}

TEST(DetectorTraining, DeterministicGivenSeed) {
  const auto v = advbot::testing::small_vocab(8);
  Rng rng(7);
  std::vector<corpus::LabeledExample> data;
  for (int i = 0; i < 30; ++i) {
    data.push_back(as_example(advbot::testing::random_pair(rng, *v), i % 3 ? corpus::Label::human : corpus::Label::bot));
  }
  auto run = [&] {
    DetectorModel m(v, small_cfg(), 1);
    DetectorTrainConfig cfg;
    cfg.steps = 10;
    cfg.batch_size = 8;
    cfg.seed = 9;
    return train_detector(m, data, cfg).losses;
  };
  EXPECT_EQ(run(), run());
}

TEST(DetectorTraining, ArgumentValidation) {
  const auto v = advbot::testing::small_vocab(3);
  DetectorModel m(v, small_cfg(), 1);
  const std::vector<ConversationPair> none;
  const std::vector<ConversationPair> one{{TokenSeq{{4}}, TokenSeq{{5}}, "", ""}};
  DetectorTrainConfig cfg;
  EXPECT_THROW(pretrain_detector(m, none, std::span<const ConversationPair>(one), cfg), std::invalid_argument);
  EXPECT_THROW(pretrain_detector(m, one, std::span<const ConversationPair>(none), cfg), std::invalid_argument);
  EXPECT_THROW(train_detector(m, std::vector<corpus::LabeledExample>{}, cfg), std::invalid_argument);
}

TEST(DetectorEvaluation, AucUndefinedWithOneClass) {
  const auto ev = evaluate_scores(std::vector<double>{0.2, 0.8}, std::vector<int>{1, 1});
  EXPECT_FALSE(ev.auc.has_value());
  EXPECT_DOUBLE_EQ(ev.accuracy, 0.5);
  EXPECT_FALSE(ev.mean_prob_bot.has_value());
  // Threshold ties go to the human class.
  EXPECT_DOUBLE_EQ(evaluate_scores(std::vector<double>{0.5}, std::vector<int>{1}).accuracy, 1.0);
}

TEST(DetectorCheckpoint, RoundTripPreservesScores) {
  const auto v = advbot::testing::small_vocab(5);
  const DetectorModel m(v, small_cfg(), 8);
  const auto path = (std::filesystem::temp_directory_path() / "advbot_det.json").string();
  save_detector(path, m);
  const auto back = load_detector(path);
  const ConversationPair p{TokenSeq{{4, 5}}, TokenSeq{{6}}, "", ""};
  EXPECT_EQ(probability_human(back, p), probability_human(m, p));
  EXPECT_EQ(back.vocab(), m.vocab());
  std::filesystem::remove(path);
}
