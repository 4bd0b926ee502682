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

#ifndef SGC_AFFINITY_H_
#define SGC_AFFINITY_H_

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sgc/dataio.h"
#include "sgc/geometry.h"

namespace sgc {

// A node of the affinity graph. The embedding has width 2*D and is stored as
// [first; second] / sqrt(2) with both halves unit length, so the whole vector
// is unit length and inner products stay cosine similarities. Level-1 nodes
// repeat the detection feature in both halves; supernodes carry the peak
// feature and the component mean.
struct GraphNode {
  Eigen::VectorXd embedding;
  GroundPoint ground;
  std::optional<int> camera_id;
  std::vector<int> member_ids;
};

struct Edge {
  int src = 0;
  int dst = 0;
  double a = 0.0;  // <h_src, h_dst>
};

struct AffinityGraph {
  std::vector<GraphNode> nodes;
  std::vector<Edge> edges;
  double max_pair_dist = 0.0;
  int level = 1;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
};

Eigen::VectorXd StackHalves(const Eigen::VectorXd& first, const Eigen::VectorXd& second);

// The unit-length first half of a node embedding, i.e. the feature that is
// carried up to the next level.
Eigen::VectorXd FirstHalf(const Eigen::VectorXd& embedding);

double MaxPairDistance(const std::vector<GraphNode>& nodes);

// (1 - <h_i, h_j>) * |g_i - g_j| / max_pair_dist. When every node sits on the
// same spot (max_pair_dist < 1e-12) the spatial factor is taken as 1.
double NodeDistance(const GraphNode& ni, const GraphNode& nj, double max_pair_dist);

std::vector<GraphNode> NodesFromScene(const Scene& scene);

// Level 1: every node links to its closest node in each other non-empty
// camera. Ties go to the lowest node index. Throws kEmptyScene for N = 0.
AffinityGraph BuildLevel1Graph(const Scene& scene);

// Levels above 1: plain kNN with k = min(M - 1, Z - 1).
AffinityGraph BuildUpperGraph(std::vector<GraphNode> nodes, int num_cameras,
                              int level = 2);

// One "src dst a" line per edge.
std::string EdgeListText(const AffinityGraph& g);

}  // namespace sgc

#endif  // SGC_AFFINITY_H_
