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

#include "sgc/groundtruth.h"

#include <map>

#include "sgc/errors.h"

namespace sgc {

std::vector<double> GtDensity(const AffinityGraph& g, std::span<const int> identities) {
  if (static_cast<int>(identities.size()) != g.num_nodes()) {
    throw Error(ErrorCode::kMissingLabel, "need one identity per node");
  }
  std::vector<double> sum(g.num_nodes(), 0.0);
  std::vector<int> degree(g.num_nodes(), 0);
  for (const Edge& e : g.edges) {
    const double sign = identities[e.src] == identities[e.dst] ? 1.0 : -1.0;
    sum[e.src] += sign * e.a;
    ++degree[e.src];
  }
  for (int i = 0; i < g.num_nodes(); ++i) {
    sum[i] = degree[i] == 0 ? 0.0 : sum[i] / degree[i];
  }
  return sum;
}

std::vector<int> NodeIdentities(const AffinityGraph& g, const Scene& scene) {
  std::vector<int> ids;
  ids.reserve(g.num_nodes());
  for (const GraphNode& node : g.nodes) {
    std::map<int, int> votes;
    for (int m : node.member_ids) {
      const auto& label = scene.detections.at(m).identity;
      if (!label) {
        throw Error(ErrorCode::kMissingLabel,
                    "detection " + std::to_string(m) + " of scene '" + scene.scene_id +
                        "' has no identity");
      }
      ++votes[*label];
    }
    int best = 0, best_votes = -1;
    for (const auto& [id, count] : votes) {  // ascending id: ties keep the lowest
      if (count > best_votes) {
        best = id;
        best_votes = count;
      }
    }
    ids.push_back(best);
  }
  return ids;
}

LabeledGraph LabelGraph(const AffinityGraph& g, const Scene& scene) {
  LabeledGraph lg;
  lg.graph = g;
  lg.node_identity = NodeIdentities(g, scene);
  lg.edge_labels.reserve(g.num_edges());
  for (const Edge& e : g.edges) {
    lg.edge_labels.push_back(lg.node_identity[e.src] == lg.node_identity[e.dst] ? 1 : 0);
  }
  return lg;
}

GtHierarchy RunGtHierarchy(const Scene& scene, const DecodeConfig& cfg) {
  const LevelScorer scorer = [&scene](const AffinityGraph& g) {
    LevelScores s;
    const std::vector<int> ids = NodeIdentities(g, scene);
    s.density = GtDensity(g, ids);
    s.candidate.reserve(g.num_edges());
    for (const Edge& e : g.edges) s.candidate.push_back(e.a);
    s.select = s.candidate;
    return s;
  };
  const std::vector<HierarchyLevel> levels = RunHierarchy(scene, cfg, scorer);
  GtHierarchy out;
  for (const HierarchyLevel& h : levels) out.graphs.push_back(LabelGraph(h.graph, scene));
  out.result = LabelsFromHierarchy(scene, levels);
  return out;
}

std::vector<LabeledGraph> BuildGtHierarchy(const Scene& scene, double p_tau, int levels) {
  return RunGtHierarchy(scene, DecodeConfig{p_tau, levels}).graphs;
}

}  // namespace sgc
