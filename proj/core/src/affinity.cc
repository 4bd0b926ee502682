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

#include "sgc/affinity.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "sgc/errors.h"

namespace sgc {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

double GroundDistance(const GroundPoint& p, const GroundPoint& q) {
  return std::hypot(p.gx - q.gx, p.gy - q.gy);
}

}  // namespace

Eigen::VectorXd StackHalves(const Eigen::VectorXd& first, const Eigen::VectorXd& second) {
  if (first.size() != second.size()) {
    throw Error(ErrorCode::kDimMismatch, "embedding halves differ in width");
  }
  Eigen::VectorXd h(first.size() * 2);
  h.head(first.size()) = first * kInvSqrt2;
  h.tail(second.size()) = second * kInvSqrt2;
  return h;
}

Eigen::VectorXd FirstHalf(const Eigen::VectorXd& embedding) {
  Eigen::VectorXd half = embedding.head(embedding.size() / 2);
  return half / half.norm();
}

double MaxPairDistance(const std::vector<GraphNode>& nodes) {
  double best = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      best = std::max(best, GroundDistance(nodes[i].ground, nodes[j].ground));
    }
  }
  return best;
}

double NodeDistance(const GraphNode& ni, const GraphNode& nj, double max_pair_dist) {
  // Rounding can push the inner product of unit vectors past 1.
  const double appearance = std::max(0.0, 1.0 - ni.embedding.dot(nj.embedding));
  const double spatial = max_pair_dist < 1e-12
                             ? 1.0
                             : GroundDistance(ni.ground, nj.ground) / max_pair_dist;
  return appearance * spatial;
}

std::vector<GraphNode> NodesFromScene(const Scene& scene) {
  std::vector<GraphNode> nodes;
  nodes.reserve(scene.detections.size());
  for (std::size_t i = 0; i < scene.detections.size(); ++i) {
    const Detection& d = scene.detections[i];
    GraphNode n;
    n.embedding = StackHalves(d.embedding, d.embedding);
    n.ground = d.ground;
    n.camera_id = d.camera_id;
    n.member_ids = {static_cast<int>(i)};
    nodes.push_back(std::move(n));
  }
  return nodes;
}

AffinityGraph BuildLevel1Graph(const Scene& scene) {
  if (scene.detections.empty()) {
    throw Error(ErrorCode::kEmptyScene, "scene '" + scene.scene_id + "' has no detections");
  }
  AffinityGraph g;
  g.level = 1;
  g.nodes = NodesFromScene(scene);
  g.max_pair_dist = MaxPairDistance(g.nodes);

  const int n = g.num_nodes();
  for (int i = 0; i < n; ++i) {
    const int own = *g.nodes[i].camera_id;
    for (int cam = 0; cam < scene.num_cameras; ++cam) {
      if (cam == own) continue;
      int best = -1;
      double best_dist = std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j) {
        if (*g.nodes[j].camera_id != cam) continue;
        const double dist = NodeDistance(g.nodes[i], g.nodes[j], g.max_pair_dist);
        if (best < 0 || dist < best_dist) {
          best = j;
          best_dist = dist;
        }
      }
      if (best >= 0) {
        g.edges.push_back({i, best, g.nodes[i].embedding.dot(g.nodes[best].embedding)});
      }
    }
  }
  return g;
}

AffinityGraph BuildUpperGraph(std::vector<GraphNode> nodes, int num_cameras, int level) {
  AffinityGraph g;
  g.level = level;
  g.nodes = std::move(nodes);
  for (GraphNode& node : g.nodes) node.camera_id.reset();
  g.max_pair_dist = MaxPairDistance(g.nodes);

  const int z = g.num_nodes();
  const int k = std::max(0, std::min(num_cameras - 1, z - 1));
  std::vector<std::pair<double, int>> candidates;
  for (int i = 0; i < z; ++i) {
    candidates.clear();
    for (int j = 0; j < z; ++j) {
      if (j == i) continue;
      candidates.emplace_back(NodeDistance(g.nodes[i], g.nodes[j], g.max_pair_dist), j);
    }
    std::partial_sort(candidates.begin(), candidates.begin() + k, candidates.end());
    for (int r = 0; r < k; ++r) {
      const int j = candidates[r].second;
      g.edges.push_back({i, j, g.nodes[i].embedding.dot(g.nodes[j].embedding)});
    }
  }
  return g;
}

std::string EdgeListText(const AffinityGraph& g) {
  std::ostringstream out;
  out.precision(17);
  for (const Edge& e : g.edges) out << e.src << ' ' << e.dst << ' ' << e.a << '\n';
  return out.str();
}

}  // namespace sgc
