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

#ifndef SGC_DECODE_H_
#define SGC_DECODE_H_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sgc/affinity.h"
#include "sgc/dataio.h"
#include "sgc/model.h"

namespace sgc {

struct DecodeConfig {
  double p_tau = 0.2;
  int levels = 3;

  void Validate() const;
};

// Subgraph of an affinity graph in which every node keeps at most one
// outgoing edge. target[i] is that edge's destination or -1.
struct RefinedGraph {
  std::vector<int> target;

  int num_nodes() const { return static_cast<int>(target.size()); }
  int num_edges() const;
};

struct ComponentSet {
  std::vector<std::vector<int>> components;  // ordered by smallest member
  std::vector<int> peaks;                    // one per component
  std::vector<int> component_of;             // per node

  int size() const { return static_cast<int>(components.size()); }
};

// Node i keeps the edge to j that maximizes select_ij (lowest j on ties)
// among its out-edges with candidate_ij >= p_tau and (d_i, i) < (d_j, j) in
// lexicographic order. The strict order makes the result a forest.
RefinedGraph FilterEdges(const AffinityGraph& g, std::span<const double> density,
                         std::span<const double> candidate,
                         std::span<const double> select, double p_tau);

// Components of the undirected view of `rg`; each must contain exactly one
// node without an outgoing edge (kMultiplePeaks / kNoPeak otherwise).
ComponentSet FindPeaksComponents(const RefinedGraph& rg);

// One supernode per component: [peak feature; mean feature], both unit
// length, at the mean ground position of the component's nodes.
std::vector<GraphNode> AggregateComponents(const ComponentSet& cs, const AffinityGraph& g);

struct LevelScores {
  std::vector<double> density;    // per node
  std::vector<double> candidate;  // per edge, compared with p_tau
  std::vector<double> select;     // per edge, argmax key
};

using LevelScorer = std::function<LevelScores(const AffinityGraph&)>;

struct HierarchyLevel {
  AffinityGraph graph;
  RefinedGraph refined;
  ComponentSet components;
};

// Builds level graphs, scores and decodes them, and aggregates until a level
// adds no edge or `levels` levels have run.
std::vector<HierarchyLevel> RunHierarchy(const Scene& scene, const DecodeConfig& cfg,
                                         const LevelScorer& scorer);

struct LevelTrace {
  int num_nodes = 0;
  int num_edges = 0;
  int refined_edges = 0;
  int num_components = 0;
};

struct ClusterResult {
  std::string scene_id;
  std::vector<int> labels;  // per detection, numbered by first appearance
  int levels_run = 0;
  std::vector<LevelTrace> trace;
};

// Propagates the final level's components back to the detections.
ClusterResult LabelsFromHierarchy(const Scene& scene,
                                  const std::vector<HierarchyLevel>& levels);

// Inference: densities and selection from the model's edge coefficients,
// candidates from its edge probabilities.
ClusterResult Cluster(const Scene& scene, const ModelParams& params,
                      const DecodeConfig& cfg);

std::string SerializeClusterResults(const std::vector<ClusterResult>& results);
std::vector<ClusterResult> ParseClusterResults(const std::string& json_text);

}  // namespace sgc

#endif  // SGC_DECODE_H_
