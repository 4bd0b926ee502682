// Copyright 2026 The SGC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "sgc/training.h"

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "json.hpp"
#include "oracles.h"
#include "sgc/errors.h"
#include "sgc/synth.h"

namespace sgc {
namespace {

constexpr double kLn2 = std::numbers::ln2;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

TEST(EdgeBceLossTest, CoinFlipCostsLn2) {
  for (int y : {0, 1}) {
    const std::vector<double> p{0.5};
    const std::vector<int> l{y};
    EXPECT_NEAR(EdgeBceLoss(p, l), kLn2, 1e-15);
  }
}

TEST(EdgeBceLossTest, MeanOverEdges) {
  const std::vector<double> p{0.5, 1.0};
  const std::vector<int> l{1, 1};
  // The second edge is clamped, so it costs -log(1 - 1e-7) rather than 0.
  EXPECT_NEAR(EdgeBceLoss(p, l), (kLn2 - std::log1p(-kProbClamp)) / 2, 1e-15);
  EXPECT_NEAR(EdgeBceLoss(p, l), kLn2 / 2, 1e-7);
}

TEST(EdgeBceLossTest, ClampBoundsTheWorstCase) {
  const std::vector<double> p{0.0, 1.0};
  const std::vector<int> l{1, 0};
  EXPECT_NEAR(EdgeBceLoss(p, l), -std::log(kProbClamp), 1e-9);
}

TEST(EdgeBceLossTest, Errors) {
  EXPECT_EQ(CodeOf([] { EdgeBceLoss({}, {}); }), ErrorCode::kEmptyEdgeSet);
  const std::vector<double> p{0.5};
  EXPECT_EQ(CodeOf([&] { EdgeBceLoss(p, {}); }), ErrorCode::kLengthMismatch);
}

struct Fixture {
  ModelParams params;
  AffinityGraph graph;
  GraphBatch batch;
  std::vector<int> labels;
};

Fixture MakeFixture(std::uint64_t seed, bool randomize, int n = 5) {
  Rng rng(seed);
  Fixture f;
  f.params = InitParams(ModelConfig::WithSteps(3, 2, 5, 4, 7), rng);
  if (randomize) testing::Randomize(f.params, rng);
  f.graph = testing::RandomGraph(rng, n, 3);
  f.batch = MakeBatch(f.graph);
  std::bernoulli_distribution coin(0.5);
  for (int e = 0; e < f.batch.num_edges(); ++e) f.labels.push_back(coin(rng) ? 1 : 0);
  return f;
}

TEST(BackwardTest, ZeroOutputLayerBiasGradient) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Fixture f = MakeFixture(seed, false);
    const LossAndGradients lg = Backward(f.batch, f.labels, f.params);
    double want = 0.0;
    for (int y : f.labels) want += 0.5 - y;
    want /= static_cast<double>(f.labels.size());
    EXPECT_NEAR(lg.grads.theta.b2(0, 0), want, 1e-15);
    EXPECT_NEAR(lg.loss, kLn2, 1e-15);
  }
}

TEST(BackwardTest, DuplicatedBatchGivesIdenticalGradients) {
  const Fixture f = MakeFixture(3, true);
  const AffinityGraph* twice[] = {&f.graph, &f.graph};
  std::vector<int> labels2 = f.labels;
  labels2.insert(labels2.end(), f.labels.begin(), f.labels.end());
  const LossAndGradients one = Backward(f.batch, f.labels, f.params);
  const LossAndGradients two = Backward(MakeBatch(twice), labels2, f.params);
  EXPECT_NEAR(one.loss, two.loss, 1e-14);
  std::vector<const Tensor*> a, b;
  one.grads.ForEachTensor([&a](const std::string&, const Tensor& t) { a.push_back(&t); });
  two.grads.ForEachTensor([&b](const std::string&, const Tensor& t) { b.push_back(&t); });
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_LE((*a[k] - *b[k]).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(BackwardTest, MatchesCentralDifferences) {
  std::int64_t checked = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Fixture f = MakeFixture(40 + seed, true, 2 + static_cast<int>(seed % 5));
    const auto report = testing::CheckGradients(f.batch, f.labels, f.params, 1e-4, 1e-10);
    EXPECT_LE(report.max_rel_error, 1e-4) << "seed " << seed << " worst " << report.worst;
    checked += report.checked;
  }
  EXPECT_GT(checked, 1000);
}

TEST(BackwardTest, UnnormalizedStepsAlsoMatch) {
  Rng rng(77);
  ModelConfig cfg = ModelConfig::WithSteps(3, 3, 5, 4, 7);
  cfg.normalize_steps = false;
  ModelParams p = InitParams(cfg, rng);
  testing::Randomize(p, rng, 0.5);
  const AffinityGraph g = testing::RandomGraph(rng, 4, 3);
  const GraphBatch b = MakeBatch(g);
  std::vector<int> y(b.num_edges(), 1);
  y[0] = 0;
  EXPECT_LE(testing::CheckGradients(b, y, p, 1e-4, 1e-10).max_rel_error, 1e-4);
}

TEST(BackwardTest, DropoutIsPartOfTheGradient) {
  const Fixture f = MakeFixture(5, true);
  Rng a(9), b(9);
  const auto lg = Backward(f.batch, f.labels, f.params, {0.3, true, &a});
  EXPECT_NEAR(lg.loss, BatchLoss(f.batch, f.labels, f.params, {0.3, true, &b}), 1e-15);
}

TEST(BackwardTest, NonFiniteLoss) {
  Fixture f = MakeFixture(6, true);
  f.params.theta.b1(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(CodeOf([&] { Backward(f.batch, f.labels, f.params); }),
            ErrorCode::kNonFiniteGradient);
}

TEST(OneCycleLrTest, Schedule) {
  EXPECT_EQ(OneCycleLr(0, 100, 0.07, 0.1), 0.0);
  EXPECT_NEAR(OneCycleLr(5, 100, 0.07, 0.1), 0.035, 1e-15);
  EXPECT_NEAR(OneCycleLr(10, 100, 0.07, 0.1), 0.07, 1e-15);
  const double last = OneCycleLr(99, 100, 0.07, 0.1);
  EXPECT_GT(last, 0.0);
  EXPECT_LE(last, 0.07 * 0.5 * (1.0 - std::cos(std::numbers::pi / 90.0)) + 1e-18);
  EXPECT_NEAR(OneCycleLr(55, 100, 0.07, 0.1), 0.035, 1e-15);
  EXPECT_NEAR(OneCycleLr(0, 10, 0.07, 0.0), 0.07, 1e-15);
  EXPECT_THROW(OneCycleLr(100, 100, 0.07, 0.1), Error);
  EXPECT_THROW(OneCycleLr(-1, 100, 0.07, 0.1), Error);
}

TEST(OneCycleLrTest, WarmupRisesThenDecays) {
  double prev = -1.0;
  for (int s = 0; s <= 20; ++s) {
    const double lr = OneCycleLr(s, 200, 0.07, 0.1);
    EXPECT_GT(lr, prev);
    prev = lr;
  }
  for (int s = 21; s < 200; ++s) {
    const double lr = OneCycleLr(s, 200, 0.07, 0.1);
    EXPECT_LT(lr, prev);
    prev = lr;
  }
}

ModelParams Filled(const ModelParams& like, double value) {
  ModelParams p = like.ZerosLike();
  p.ForEachTensor([value](const std::string&, Tensor& t) { t.setConstant(value); });
  return p;
}

TEST(AdamStepTest, ZeroGradientIsAFixedPoint) {
  const Fixture f = MakeFixture(1, true);
  ModelParams p = f.params;
  AdamState st = MakeAdamState(p);
  AdamStep(p, p.ZerosLike(), st, 0.07, {});
  p.ForEachTensor([&](const std::string& name, const Tensor& t) {
    f.params.ForEachTensor([&](const std::string& other, const Tensor& u) {
      if (name == other) EXPECT_EQ(t, u) << name;
    });
  });
  EXPECT_EQ(st.t, 1);
}

TEST(AdamStepTest, FirstStepMovesByLearningRate) {
  const Fixture f = MakeFixture(2, true);
  for (double g : {3.0, -0.02}) {
    ModelParams p = f.params;
    AdamState st = MakeAdamState(p);
    AdamStep(p, Filled(p, g), st, 0.07, {});
    const double want = -0.07 * g / (std::abs(g) + 1e-8);
    EXPECT_NEAR(p.theta.b2(0, 0) - f.params.theta.b2(0, 0), want, 1e-15);
    EXPECT_NEAR(p.steps[0].psi.w1(1, 2) - f.params.steps[0].psi.w1(1, 2), want, 1e-15);
  }
}

TEST(AdamStepTest, MomentFreeReducesToSignDescent) {
  const Fixture f = MakeFixture(4, true);
  ModelParams p = f.params;
  AdamState st = MakeAdamState(p);
  const AdamConfig cfg{0.0, 0.0, 1e-8};
  AdamStep(p, Filled(p, 0.5), st, 0.01, cfg);
  AdamStep(p, Filled(p, 0.5), st, 0.01, cfg);
  EXPECT_NEAR(p.theta.w1(0, 0) - f.params.theta.w1(0, 0), -0.02, 1e-9);
}

TEST(AdamStepTest, ShapeMismatch) {
  const Fixture f = MakeFixture(4, true);
  ModelParams p = f.params;
  AdamState st = MakeAdamState(p);
  ModelParams g = p.ZerosLike();
  g.theta.w1.resize(1, 1);
  EXPECT_EQ(CodeOf([&] { AdamStep(p, g, st, 0.1, {}); }), ErrorCode::kDimMismatch);
}

std::vector<Scene> SmallScenes(int count, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.embed_dim = 8;
  cfg.num_scenes = count;
  cfg.seed = seed;
  return GenerateDataset(cfg).scenes;
}

TrainConfig SmallTrainConfig(int epochs) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = 8;
  cfg.gcn_width = 8;
  cfg.final_dim = 6;
  cfg.theta_hidden = 8;
  cfg.seed = 3;
  return cfg;
}

bool SameParams(const ModelParams& a, const ModelParams& b) {
  std::vector<Tensor> ta, tb;
  a.ForEachTensor([&ta](const std::string&, const Tensor& t) { ta.push_back(t); });
  b.ForEachTensor([&tb](const std::string&, const Tensor& t) { tb.push_back(t); });
  return ta == tb;
}

TEST(TrainTest, ZeroEpochsReturnsInitialParameters) {
  const auto scenes = SmallScenes(4, 1);
  const TrainConfig cfg = SmallTrainConfig(0);
  const TrainResult r = Train(scenes, {}, cfg);
  Rng rng = MakeRng(cfg.seed, "init");
  EXPECT_TRUE(SameParams(r.best, InitParams(cfg.MakeModelConfig(8), rng)));
  EXPECT_TRUE(r.history.empty());
  EXPECT_EQ(r.best_epoch, 0);
}

TEST(TrainTest, DeterministicForAFixedSeed) {
  const auto train = SmallScenes(12, 1);
  const auto val = SmallScenes(4, 2);
  const TrainResult a = Train(train, val, SmallTrainConfig(3));
  const TrainResult b = Train(train, val, SmallTrainConfig(3));
  EXPECT_EQ(SerializeHistory(a.history), SerializeHistory(b.history));
  EXPECT_TRUE(SameParams(a.final, b.final));
  EXPECT_TRUE(SameParams(a.best, b.best));
}

TEST(TrainTest, LearnsOnSeparableData) {
  const auto train = SmallScenes(40, 1);
  const auto val = SmallScenes(10, 2);
  TrainConfig cfg = SmallTrainConfig(15);
  int calls = 0;
  const TrainResult r = Train(train, val, cfg, [&calls](const EpochRecord&) { ++calls; });
  ASSERT_EQ(r.history.size(), 15u);
  EXPECT_EQ(calls, 15);
  EXPECT_LT(r.history.back().loss, kLn2);
  EXPECT_LT(r.history.back().loss, r.history.front().loss);
  EXPECT_GE(r.best_epoch, 1);
  EXPECT_EQ(r.best_v_measure, r.history[r.best_epoch - 1].val->v_measure);
  for (const EpochRecord& e : r.history) EXPECT_LE(e.val->v_measure, r.best_v_measure);
}

TEST(TrainTest, WithoutValidationBestIsFinal) {
  const TrainResult r = Train(SmallScenes(6, 1), {}, SmallTrainConfig(2));
  EXPECT_TRUE(SameParams(r.best, r.final));
  EXPECT_EQ(r.best_epoch, 2);
  EXPECT_FALSE(r.history[0].val.has_value());
}

TEST(TrainTest, RejectsUnusableInput) {
  auto scenes = SmallScenes(3, 1);
  scenes[1].detections[0].identity.reset();
  EXPECT_EQ(CodeOf([&] { Train(scenes, {}, SmallTrainConfig(1)); }), ErrorCode::kMissingLabel);

  Scene lonely = SmallScenes(1, 1)[0];
  lonely.detections.resize(1);
  const std::vector<Scene> one{lonely};
  EXPECT_EQ(CodeOf([&] { Train(one, {}, SmallTrainConfig(1)); }), ErrorCode::kEmptyPool);

  TrainConfig bad = SmallTrainConfig(1);
  bad.warmup_fraction = 1.0;
  EXPECT_EQ(CodeOf([&] { Train(SmallScenes(2, 1), {}, bad); }), ErrorCode::kInvalidArgument);
}

TEST(GtPoolTest, DropsEdgelessGraphs) {
  const auto scenes = SmallScenes(5, 7);
  const auto pool = BuildGtPool(scenes, {0.2, 3});
  ASSERT_FALSE(pool.empty());
  for (const LabeledGraph& lg : pool) EXPECT_GT(lg.graph.num_edges(), 0);
  std::vector<const LabeledGraph*> ptrs{&pool[0], &pool[1]};
  std::vector<int> labels;
  const GraphBatch b = MakeLabeledBatch(ptrs, &labels);
  EXPECT_EQ(b.num_edges(), static_cast<int>(labels.size()));
  EXPECT_EQ(b.num_nodes(), pool[0].graph.num_nodes() + pool[1].graph.num_nodes());
}

TEST(SerializeHistoryTest, Layout) {
  EpochRecord r;
  r.epoch = 1;
  r.loss = 0.5;
  r.lr = 0.01;
  r.val = MetricsReport{1, 2, 3, 4, 5};
  const auto j = nlohmann::json::parse(SerializeHistory({r}));
  EXPECT_EQ(j["epochs"][0]["epoch"], 1);
  EXPECT_EQ(j["epochs"][0]["val"]["v_measure"], 5.0);
}

}  // namespace
}  // namespace sgc
