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


#include "sgc/decode.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "oracles.h"
#include "sgc/errors.h"
#include "sgc/synth.h"

namespace sgc {
namespace {

using testing::DecodeInstance;
using testing::GraphOf;
using testing::OracleDecode;
using testing::RandomDecodeInstance;

RefinedGraph Filter(const DecodeInstance& inst) {
  return FilterEdges(GraphOf(inst), inst.density, inst.candidate, inst.select, inst.p_tau);
}

TEST(FilterEdgesTest, ThresholdAboveRangeKeepsNothing) {
  DecodeInstance inst{3, {{0, 1}, {1, 2}, {2, 0}}, {0.1, 0.2, 0.3}, {1, 1, 1}, {1, 1, 1}, 1.1};
  EXPECT_EQ(Filter(inst).num_edges(), 0);
}

TEST(FilterEdgesTest, MutualPairKeepsUphillEdge) {
  DecodeInstance inst{2, {{0, 1}, {1, 0}}, {0.2, 0.8}, {0.9, 0.9}, {0.9, 0.9}, 0.2};
  EXPECT_EQ(Filter(inst).target, (std::vector<int>{1, -1}));
}

TEST(FilterEdgesTest, ArgmaxOfSelectScore) {
  // Node 1 may climb to 0 or 2; it keeps the higher-scoring edge to 2.
  DecodeInstance inst{3, {{1, 0}, {1, 2}}, {0.5, 0.1, 0.6}, {0.9, 0.9}, {0.3, 0.7}, 0.2};
  EXPECT_EQ(Filter(inst).target, (std::vector<int>{-1, 2, -1}));
}

TEST(FilterEdgesTest, EqualDensityBreaksTowardHigherIndex) {
  DecodeInstance inst{2, {{0, 1}, {1, 0}}, {0.4, 0.4}, {0.9, 0.9}, {0.9, 0.9}, 0.2};
  EXPECT_EQ(Filter(inst).target, (std::vector<int>{1, -1}));
}

TEST(FilterEdgesTest, SelectTieGoesToLowestTarget) {
  DecodeInstance inst{3, {{0, 2}, {0, 1}}, {0.0, 0.5, 0.5}, {0.9, 0.9}, {0.6, 0.6}, 0.2};
  EXPECT_EQ(Filter(inst).target[0], 1);
}

TEST(FilterEdgesTest, LengthMismatch) {
  DecodeInstance inst{2, {{0, 1}}, {0.2, 0.8}, {0.9}, {0.9}, 0.2};
  EXPECT_THROW(FilterEdges(GraphOf(inst), inst.density, std::vector<double>{}, inst.select, 0.2),
               Error);
}

TEST(FindPeaksTest, EdgelessGivesSingletons) {
  RefinedGraph rg;
  rg.target.assign(5, -1);
  const ComponentSet cs = FindPeaksComponents(rg);
  EXPECT_EQ(cs.size(), 5);
  for (int c = 0; c < 5; ++c) EXPECT_EQ(cs.peaks[c], c);
}

TEST(FindPeaksTest, ChainHasOnePeakAtTheEnd) {
  RefinedGraph rg{{1, 2, -1}};
  const ComponentSet cs = FindPeaksComponents(rg);
  ASSERT_EQ(cs.size(), 1);
  EXPECT_EQ(cs.components[0], (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(cs.peaks[0], 2);
}

TEST(FindPeaksTest, TwoDisjointPairs) {
  RefinedGraph rg{{1, -1, 3, -1}};
  const ComponentSet cs = FindPeaksComponents(rg);
  EXPECT_EQ(cs.size(), 2);
  EXPECT_EQ(cs.peaks, (std::vector<int>{1, 3}));
  EXPECT_EQ(cs.component_of, (std::vector<int>{0, 0, 1, 1}));
}

TEST(FindPeaksTest, CycleHasNoPeak) {
  RefinedGraph rg{{1, 0}};
  try {
    FindPeaksComponents(rg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoPeak);
  }
}

TEST(FindPeaksTest, JoinedTreesWithTwoSinks) {
  // 0 -> 1 and 2 -> 1 share one sink; 3 -> 2 is fine. A second sink in one
  // component cannot arise from out-degree <= 1 alone, so only NoPeak is
  // reachable by hand; a two-node cycle plus a tail exercises it again.
  RefinedGraph rg{{1, 2, 1, 2}};
  EXPECT_THROW(FindPeaksComponents(rg), Error);
}

GraphNode Leaf(const Eigen::VectorXd& f, GroundPoint g, int member) {
  GraphNode v;
  v.embedding = StackHalves(f, f);
  v.ground = g;
  v.member_ids = {member};
  return v;
}

TEST(AggregateTest, SingletonKeepsItsFeatureAndPosition) {
  AffinityGraph g;
  const Eigen::Vector2d f(0.6, 0.8);
  g.nodes = {Leaf(f, {3, 4}, 7)};
  ComponentSet cs = FindPeaksComponents(RefinedGraph{{-1}});
  const auto next = AggregateComponents(cs, g);
  ASSERT_EQ(next.size(), 1u);
  EXPECT_LE((next[0].embedding - g.nodes[0].embedding).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(next[0].ground, (GroundPoint{3, 4}));
  EXPECT_EQ(next[0].member_ids, (std::vector<int>{7}));
}

TEST(AggregateTest, MeanGroundAndMemberUnion) {
  AffinityGraph g;
  g.nodes = {Leaf(Eigen::Vector2d(1, 0), {0, 0}, 4), Leaf(Eigen::Vector2d(0, 1), {2, 2}, 1)};
  const ComponentSet cs = FindPeaksComponents(RefinedGraph{{1, -1}});
  const auto next = AggregateComponents(cs, g);
  ASSERT_EQ(next.size(), 1u);
  EXPECT_EQ(next[0].ground, (GroundPoint{1, 1}));
  EXPECT_EQ(next[0].member_ids, (std::vector<int>{1, 4}));
  // First half: the peak (node 1); second half: normalized mean.
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::VectorXd want(4);
  want << 0, r, r * r, r * r;
  EXPECT_LE((next[0].embedding - want).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(next[0].embedding.norm(), 1.0, 1e-15);
}

TEST(AggregateTest, IdenticalMembersStayPut) {
  AffinityGraph g;
  const Eigen::Vector3d e = Eigen::Vector3d(1, 2, 2) / 3.0;
  g.nodes = {Leaf(e, {0, 0}, 0), Leaf(e, {1, 0}, 1)};
  const auto next = AggregateComponents(FindPeaksComponents(RefinedGraph{{-1, 0}}), g);
  EXPECT_LE((next[0].embedding - StackHalves(e, e)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(AggregateTest, CancellingMeanFallsBackToPeak) {
  AffinityGraph g;
  g.nodes = {Leaf(Eigen::Vector2d(1, 0), {0, 0}, 0), Leaf(Eigen::Vector2d(-1, 0), {1, 0}, 1)};
  const auto next = AggregateComponents(FindPeaksComponents(RefinedGraph{{1, -1}}), g);
  EXPECT_LE((next[0].embedding - StackHalves(Eigen::Vector2d(-1, 0), Eigen::Vector2d(-1, 0)))
                .cwiseAbs()
                .maxCoeff(),
            1e-15);
}

Scene TwoPeople() {
  Scene s;
  s.scene_id = "pair";
  s.num_cameras = 2;
  const Eigen::Vector2d a(1, 0), b(0, 1);
  s.detections = {{0, std::nullopt, {0, 0}, a, 0},
                  {0, std::nullopt, {10, 10}, b, 1},
                  {1, std::nullopt, {0.1, 0}, a, 0},
                  {1, std::nullopt, {10, 10.1}, b, 1}};
  return s;
}

TEST(ClusterTest, SingleDetection) {
  Scene s;
  s.scene_id = "one";
  s.num_cameras = 2;
  s.detections = {{0, std::nullopt, {0, 0}, Eigen::Vector2d(1, 0), 0}};
  Rng rng(0);
  const ModelParams p = InitParams(ModelConfig::WithSteps(2, 2, 4, 3, 5), rng);
  const ClusterResult r = Cluster(s, p, {});
  EXPECT_EQ(r.labels, (std::vector<int>{0}));
  EXPECT_EQ(r.levels_run, 1);
}

TEST(ClusterTest, HighThresholdLeavesSingletons) {
  Rng rng(1);
  ModelParams p = InitParams(ModelConfig::WithSteps(2, 2, 4, 3, 5), rng);
  testing::Randomize(p, rng);
  const ClusterResult r = Cluster(TwoPeople(), p, {1.1, 3});
  EXPECT_EQ(r.labels, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(r.levels_run, 1);
}

TEST(ClusterTest, ScorerDrivesTheHierarchy) {
  // Link exactly the same-appearance pairs.
  const LevelScorer by_similarity = [](const AffinityGraph& g) {
    LevelScores s;
    for (const Edge& e : g.edges) {
      s.candidate.push_back(e.a);
      s.select.push_back(e.a);
    }
    s.density.assign(g.num_nodes(), 0.0);
    return s;
  };
  const Scene scene = TwoPeople();
  const auto levels = RunHierarchy(scene, {0.5, 3}, by_similarity);
  const ClusterResult r = LabelsFromHierarchy(scene, levels);
  EXPECT_EQ(r.labels, (std::vector<int>{0, 1, 0, 1}));
  // Level 2 has two supernodes whose appearances are orthogonal: nothing merges.
  EXPECT_EQ(r.levels_run, 2);
  EXPECT_EQ(r.trace[0].num_nodes, 4);
  EXPECT_EQ(r.trace[1].num_nodes, 2);
  EXPECT_EQ(r.trace[1].refined_edges, 0);
}

TEST(ClusterTest, LevelCapStopsEarly) {
  const LevelScorer link_all = [](const AffinityGraph& g) {
    LevelScores s;
    s.candidate.assign(g.num_edges(), 1.0);
    s.select.assign(g.num_edges(), 1.0);
    s.density.assign(g.num_nodes(), 0.0);
    return s;
  };
  const auto levels = RunHierarchy(TwoPeople(), {0.2, 1}, link_all);
  EXPECT_EQ(levels.size(), 1u);
}

TEST(ClusterResultsTest, RoundTrip) {
  std::vector<ClusterResult> rs(2);
  rs[0] = {"a", {0, 1, 0}, 2, {}};
  rs[1] = {"b", {0}, 1, {}};
  const std::string text = SerializeClusterResults(rs);
  EXPECT_EQ(text,
            "{\"results\":[{\"labels\":[0,1,0],\"levels_run\":2,\"scene_id\":\"a\"},"
            "{\"labels\":[0],\"levels_run\":1,\"scene_id\":\"b\"}],\"version\":1}\n");
  const auto back = ParseClusterResults(text);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].labels, rs[0].labels);
  EXPECT_EQ(back[1].scene_id, "b");
  EXPECT_THROW(ParseClusterResults("{\"results\": [{}]}"), Error);
}

TEST(DecodePropertyTest, MatchesLiteralOracle) {
  Rng rng(31);
  for (int t = 0; t < 1000; ++t) {
    const DecodeInstance inst = RandomDecodeInstance(rng, 8);
    const RefinedGraph rg = Filter(inst);
    const testing::DecodeOutcome want = OracleDecode(inst);
    ASSERT_EQ(rg.target, want.target) << "instance " << t;
    ASSERT_TRUE(want.single_sink);
    const ComponentSet cs = FindPeaksComponents(rg);
    for (int i = 0; i < inst.num_nodes; ++i) {
      ASSERT_EQ(cs.components[cs.component_of[i]].front(), want.root[i]);
      ASSERT_EQ(cs.peaks[cs.component_of[i]], want.peak_of[i]);
    }
  }
}

TEST(DecodePropertyTest, RaisingThresholdNeverAddsEdges) {
  Rng rng(32);
  for (int t = 0; t < 1000; ++t) {
    DecodeInstance inst = RandomDecodeInstance(rng, 8);
    int prev = -1;
    for (double tau : {1.1, 0.9, 0.5, 0.2, 0.0}) {
      inst.p_tau = tau;
      const int count = Filter(inst).num_edges();
      ASSERT_GE(count, prev);
      prev = count;
    }
  }
}

TEST(DecodePropertyTest, PeakHoldsTheHighestDensity) {
  Rng rng(33);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    DecodeInstance inst = RandomDecodeInstance(rng, 8);
    for (double& d : inst.density) d = u(rng);  // distinct with probability 1
    const ComponentSet cs = FindPeaksComponents(Filter(inst));
    for (int c = 0; c < cs.size(); ++c) {
      for (int v : cs.components[c]) {
        ASSERT_LE(inst.density[v], inst.density[cs.peaks[c]]);
      }
    }
  }
}

}  // namespace
}  // namespace sgc
