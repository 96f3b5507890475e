#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "assist/errors.hpp"
#include "assist/harness.hpp"
#include "assist/protocol.hpp"
#include "test_util.hpp"

namespace assist {
namespace {

Party quadratic_party(ParamVector center) { return {ModelSpec::quadratic(std::move(center)), {}}; }

double sq_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

TEST(CheckpointIndices, RuleExamples) {
  EXPECT_EQ(checkpoint_indices(10, 4), (std::vector<std::int64_t>{0, 4, 8, 10}));
  EXPECT_EQ(checkpoint_indices(8, 4), (std::vector<std::int64_t>{0, 4, 8}));
  EXPECT_EQ(checkpoint_indices(0, 3), (std::vector<std::int64_t>{0}));
  EXPECT_EQ(checkpoint_indices(3, 1), (std::vector<std::int64_t>{0, 1, 2, 3}));
  EXPECT_EQ(checkpoint_indices(3, 50), (std::vector<std::int64_t>{0, 3}));
  EXPECT_THROW(checkpoint_indices(3, 0), InvalidArgument);
}

TEST(EpochSampler, EachEpochCoversEveryRecord) {
  EpochSampler sampler(10, 4);
  Rng rng(3);
  for (int epoch = 0; epoch < 3; ++epoch) {
    std::multiset<std::size_t> seen;
    std::vector<std::size_t> sizes;
    for (int b = 0; b < 3; ++b) {
      const auto batch = sampler.next(rng);
      sizes.push_back(batch.size());
      seen.insert(batch.begin(), batch.end());
    }
    EXPECT_EQ(sizes, (std::vector<std::size_t>{4, 4, 2}));
    ASSERT_EQ(seen.size(), 10u);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(seen.count(i), 1u);
  }
}

TEST(LocalTrain, ZeroIterationsGivesStartOnly) {
  const auto party = quadratic_party({1.0, 2.0});
  Rng rng(1);
  const auto packet = local_train(party, {0.0, 0.0}, {0, 0.1, kFullBatch, 1, {}}, rng);
  ASSERT_EQ(packet.checkpoints.size(), 1u);
  EXPECT_EQ(packet.checkpoints[0].iter_index, 0);
  EXPECT_EQ(packet.checkpoints[0].params, (ParamVector{0.0, 0.0}));
  EXPECT_DOUBLE_EQ(packet.checkpoints[0].local_value, 2.5);
}

TEST(LocalTrain, QuadraticStepIsClosedForm) {
  const ParamVector c{1.0, -1.25}, theta0{0.3, 0.7};
  const double eta = 0.3;
  const auto party = quadratic_party(c);
  Rng rng(1);
  const auto packet = local_train(party, theta0, {1, eta, kFullBatch, 1, {}}, rng);
  ASSERT_EQ(packet.checkpoints.size(), 2u);
  for (int i = 0; i < 2; ++i)
    EXPECT_DOUBLE_EQ(packet.checkpoints[1].params[i], theta0[i] - eta * (theta0[i] - c[i]));
}

TEST(LocalTrain, CheckpointsCarryFullDataSumLoss) {
  std::mt19937_64 gen(8);
  const Party party{ModelSpec::logistic(3, 2), testing::random_dataset(gen, 30, 3, 2)};
  Rng rng(5);
  const auto packet = local_train(party, ParamVector(8, 0.0), {10, 0.2, 4, 4, {}}, rng);
  std::vector<std::int64_t> idx;
  for (const auto& cp : packet.checkpoints) {
    idx.push_back(cp.iter_index);
    EXPECT_EQ(cp.local_value, loss(party.spec, cp.params, party.data, Aggregation::kSum));
  }
  EXPECT_EQ(idx, (std::vector<std::int64_t>{0, 4, 8, 10}));
  EXPECT_NO_THROW(packet.validate());
}

TEST(LocalTrain, DivergenceReportsIteration) {
  const auto party = quadratic_party({1.0});
  Rng rng(1);
  try {
    local_train(party, {2.0}, {10, 1e200, kFullBatch, 1, {}}, rng);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GE(e.iteration(), 1);
    EXPECT_LE(e.iteration(), 10);
  }
}

TEST(LocalTrain, ObserverSeesEveryIterate) {
  const auto party = quadratic_party({1.0});
  Rng rng(1);
  int calls = 0;
  local_train(party, {0.0}, {7, 0.1, kFullBatch, 3, {}}, rng, PartyRole::kProvider, 1,
              [&](PartyRole role, std::span<const double>) {
                EXPECT_EQ(role, PartyRole::kProvider);
                ++calls;
              });
  EXPECT_EQ(calls, 8);
}

TEST(TrajectoryPacket, Validation) {
  TrajectoryPacket p{PartyRole::kLearner, 1, {}};
  EXPECT_THROW(p.validate(), InvalidArgument);
  p.checkpoints = {{1, {0.0}, 0.0}};
  EXPECT_THROW(p.validate(), InvalidArgument);
  p.checkpoints = {{0, {0.0}, 0.0}, {2, {0.0}, 1.0}, {2, {0.0}, 1.0}};
  EXPECT_THROW(p.validate(), InvalidArgument);
  p.checkpoints = {{0, {0.0}, 0.0}, {2, {0.0}, NAN}};
  EXPECT_THROW(p.validate(), InvalidArgument);
  p.checkpoints = {{0, {0.0}, 0.0}, {2, {0.0}, 1.0}};
  EXPECT_NO_THROW(p.validate());
}

// Receiver 1/2 theta^2: own losses 0, 0.5, 0.1 at theta = 0, 1, sqrt(0.2).
TEST(SelectBest, PicksSmallestGlobalLoss) {
  const auto receiver = quadratic_party({0.0});
  TrajectoryPacket p{PartyRole::kLearner, 1,
                     {{0, {0.0}, 3.0}, {1, {1.0}, 1.0}, {2, {std::sqrt(0.2)}, 2.0}}};
  const auto s = select_best(p, receiver);
  EXPECT_EQ(s.position, 1u);
  EXPECT_EQ(s.checkpoint.iter_index, 1);
  EXPECT_DOUBLE_EQ(s.global_value, 1.5);
}

TEST(SelectBest, SingleCheckpointAndTies) {
  const auto receiver = quadratic_party({0.0});
  TrajectoryPacket single{PartyRole::kProvider, 2, {{0, {0.5}, 4.0}}};
  EXPECT_EQ(select_best(single, receiver).position, 0u);
  TrajectoryPacket tie{PartyRole::kProvider, 2, {{0, {1.0}, 2.0}, {3, {-1.0}, 2.0}}};
  EXPECT_EQ(select_best(tie, receiver).checkpoint.iter_index, 0);
}

TEST(MergeParties, QuadraticSumIsExact) {
  const auto a = quadratic_party({-1.0, -1.0});
  const auto b = quadratic_party({1.0, -1.25});
  const auto g = merge_parties(a, b);
  std::mt19937_64 gen(2);
  for (int i = 0; i < 20; ++i) {
    const auto theta = testing::random_vector(gen, 2, 3.0);
    EXPECT_NEAR(g.local_loss(theta), a.local_loss(theta) + b.local_loss(theta), 1e-12);
  }
  EXPECT_EQ(g.spec.quadratic_center, (ParamVector{0.0, -1.125}));
}

TEST(AssistConfig, ProportionalSplit) {
  AssistConfig c;
  c.local_iters = 2000;
  EXPECT_EQ(c.split(5000, 45000), (std::pair<std::int64_t, std::int64_t>{200, 1800}));
  c.local_iters = 3;
  EXPECT_EQ(c.split(1, 1), (std::pair<std::int64_t, std::int64_t>{2, 1}));
  EXPECT_EQ(c.split(0, 0), (std::pair<std::int64_t, std::int64_t>{2, 1}));
  c.explicit_split = {{7, 9}};
  EXPECT_EQ(c.split(5000, 45000), (std::pair<std::int64_t, std::int64_t>{7, 9}));
}

TEST(LearningRate, Schedule) {
  const LearningRate lr{1.0, 0.9};
  EXPECT_DOUBLE_EQ(lr.at(1), 0.9);
  EXPECT_DOUBLE_EQ(lr.at(3), 0.729);
  EXPECT_DOUBLE_EQ((LearningRate{0.2, 1.0}).at(7), 0.2);
}

TEST(AssistRound, ZeroIterationsIsIdentity) {
  const auto l = quadratic_party({-1.0, -1.0});
  const auto p = quadratic_party({1.0, -1.25});
  AssistConfig c;
  c.explicit_split = {{0, 0}};
  auto streams = RoundStreams::from_seed(1);
  const ParamVector theta{0.4, 0.2};
  const auto [next, record] = assist_round(1, theta, c, l, p, streams);
  EXPECT_EQ(next, theta);
  EXPECT_EQ(record.global_loss_after, record.global_loss_before);
}

// The first round moves off a far start; later rounds may settle on a point
// neither party can improve, so they only have to be non-increasing.
TEST(AssistRound, QuadraticPairDecreases) {
  const auto l = quadratic_party({-1.0, -1.0});
  const auto p = quadratic_party({1.0, -1.25});
  const auto g = merge_parties(l, p);
  AssistConfig c;
  c.explicit_split = {{10, 10}};
  c.eta = {0.3, 1.0};
  auto streams = RoundStreams::from_seed(1);
  ParamVector theta{2.0, 3.0};
  for (int r = 1; r <= 8; ++r) {
    ASSERT_GT(sq_norm(gradient(g.spec, theta, g.data)), 0.0);
    auto [next, record] = assist_round(r, theta, c, l, p, streams);
    if (r == 1) EXPECT_LT(record.global_loss_after, record.global_loss_before);
    EXPECT_LE(record.global_loss_after, record.global_loss_before);
    EXPECT_NEAR(record.global_loss_before, g.local_loss(theta), 1e-12);
    EXPECT_NEAR(record.global_loss_after, g.local_loss(next), 1e-12);
    theta = next;
  }
}

TEST(RunAssistSgd, FullBatchIsMonotoneOnRandomTasks) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto spec = trial % 2 ? ModelSpec::mlp(3, {4}, 3) : ModelSpec::logistic(3, 3);
    const Party l{spec, testing::random_dataset(gen, 15, 3, 3)};
    const Party p{spec, testing::random_dataset(gen, 40, 3, 3)};
    AssistConfig c;
    c.rounds = 6;
    c.local_iters = 30;
    c.eta = {1.5, 1.0};  // large enough that plain steps overshoot
    c.sample_period = 5;
    c.seed = static_cast<std::uint64_t>(trial);
    const auto h = run_assist_sgd(c, l, p);
    ASSERT_EQ(h.models.size(), 7u);
    ASSERT_EQ(h.metrics.size(), 7u);
    EXPECT_EQ(verify_monotonicity(h).status, MonotonicityReport::Status::kPass)
        << verify_monotonicity(h).message;
    for (const auto& rec : h.rounds) {
      EXPECT_LE(rec.provider_init_loss, rec.global_loss_before + kMonotonicityTolerance);
      EXPECT_LE(rec.global_loss_after, rec.provider_init_loss + kMonotonicityTolerance);
    }
  }
}

TEST(RunAssistSgd, BestIsLowestRoundOutput) {
  std::mt19937_64 gen(4);
  const auto spec = ModelSpec::logistic(2, 2);
  const Party l{spec, testing::random_dataset(gen, 10, 2, 2)};
  const Party p{spec, testing::random_dataset(gen, 10, 2, 2)};
  AssistConfig c;
  c.rounds = 5;
  c.local_iters = 8;
  c.batch_size = 3;
  c.seed = 9;
  const auto h = run_assist_sgd(c, l, p);
  const auto g = merge_parties(l, p);
  double best = INFINITY;
  ParamVector arg;
  for (std::size_t r = 1; r < h.models.size(); ++r) {
    const double v = g.local_loss(h.models[r]);
    if (v < best) {
      best = v;
      arg = h.models[r];
    }
  }
  EXPECT_EQ(h.best, arg);
  EXPECT_FALSE(h.full_batch);
  // Same seed, same trajectory.
  EXPECT_EQ(run_assist_sgd(c, l, p).models, h.models);
}

}  // namespace
}  // namespace assist
