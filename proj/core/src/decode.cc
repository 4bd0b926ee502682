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
#include <numeric>
#include <string>

#include "json.hpp"
#include "sgc/errors.h"

namespace sgc {

void DecodeConfig::Validate() const {
  if (!std::isfinite(p_tau)) throw Error(ErrorCode::kInvalidArgument, "p_tau must be finite");
  if (levels < 1) throw Error(ErrorCode::kInvalidArgument, "levels must be >= 1");
}

int RefinedGraph::num_edges() const {
  return static_cast<int>(std::count_if(target.begin(), target.end(),
                                        [](int t) { return t >= 0; }));
}

RefinedGraph FilterEdges(const AffinityGraph& g, std::span<const double> density,
                         std::span<const double> candidate,
                         std::span<const double> select, double p_tau) {
  const int n = g.num_nodes();
  if (static_cast<int>(density.size()) != n ||
      static_cast<int>(candidate.size()) != g.num_edges() ||
      static_cast<int>(select.size()) != g.num_edges()) {
    throw Error(ErrorCode::kLengthMismatch, "scores do not match the graph");
  }
  RefinedGraph rg;
  rg.target.assign(n, -1);
  std::vector<double> best(n, 0.0);
  for (int e = 0; e < g.num_edges(); ++e) {
    const int i = g.edges[e].src;
    const int j = g.edges[e].dst;
    const bool uphill = density[i] < density[j] || (density[i] == density[j] && i < j);
    if (!uphill || !(candidate[e] >= p_tau)) continue;
    if (rg.target[i] < 0 || select[e] > best[i] ||
        (select[e] == best[i] && j < rg.target[i])) {
      rg.target[i] = j;
      best[i] = select[e];
    }
  }
  return rg;
}

ComponentSet FindPeaksComponents(const RefinedGraph& rg) {
  const int n = rg.num_nodes();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&parent](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (int i = 0; i < n; ++i) {
    const int j = rg.target[i];
    if (j < 0) continue;
    const int a = find(i), b = find(j);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }

  ComponentSet cs;
  cs.component_of.assign(n, -1);
  std::vector<int> index_of_root(n, -1);
  for (int i = 0; i < n; ++i) {
    const int root = find(i);
    if (index_of_root[root] < 0) {
      index_of_root[root] = cs.size();
      cs.components.emplace_back();
      cs.peaks.push_back(-1);
    }
    const int c = index_of_root[root];
    cs.component_of[i] = c;
    cs.components[c].push_back(i);
    if (rg.target[i] < 0) {
      if (cs.peaks[c] >= 0) {
        throw Error(ErrorCode::kMultiplePeaks,
                    "component of node " + std::to_string(i) + " has two peaks");
      }
      cs.peaks[c] = i;
    }
  }
  for (int c = 0; c < cs.size(); ++c) {
    if (cs.peaks[c] < 0) {
      throw Error(ErrorCode::kNoPeak, "component " + std::to_string(c) + " has no peak");
    }
  }
  return cs;
}

std::vector<GraphNode> AggregateComponents(const ComponentSet& cs, const AffinityGraph& g) {
  std::vector<GraphNode> next;
  next.reserve(cs.size());
  for (int c = 0; c < cs.size(); ++c) {
    const std::vector<int>& members = cs.components[c];
    const Eigen::VectorXd peak = FirstHalf(g.nodes[cs.peaks[c]].embedding);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(peak.size());
    GroundPoint ground;
    GraphNode node;
    for (int v : members) {
      mean += FirstHalf(g.nodes[v].embedding);
      ground.gx += g.nodes[v].ground.gx;
      ground.gy += g.nodes[v].ground.gy;
      node.member_ids.insert(node.member_ids.end(), g.nodes[v].member_ids.begin(),
                             g.nodes[v].member_ids.end());
    }
    mean /= static_cast<double>(members.size());
    const double norm = mean.norm();
    // Antipodal members can cancel out; fall back to the peak direction.
    mean = norm < 1e-12 ? peak : Eigen::VectorXd(mean / norm);
    ground.gx /= static_cast<double>(members.size());
    ground.gy /= static_cast<double>(members.size());
    std::sort(node.member_ids.begin(), node.member_ids.end());
    node.embedding = StackHalves(peak, mean);
    node.ground = ground;
    next.push_back(std::move(node));
  }
  return next;
}

std::vector<HierarchyLevel> RunHierarchy(const Scene& scene, const DecodeConfig& cfg,
                                         const LevelScorer& scorer) {
  cfg.Validate();
  std::vector<HierarchyLevel> levels;
  AffinityGraph g = BuildLevel1Graph(scene);
  for (int level = 1;; ++level) {
    LevelScores scores = scorer(g);
    HierarchyLevel h;
    h.refined = FilterEdges(g, scores.density, scores.candidate, scores.select, cfg.p_tau);
    h.components = FindPeaksComponents(h.refined);
    const bool stop = h.refined.num_edges() == 0 || level >= cfg.levels;
    std::vector<GraphNode> next;
    if (!stop) next = AggregateComponents(h.components, g);
    h.graph = std::move(g);
    levels.push_back(std::move(h));
    if (stop) break;
    g = BuildUpperGraph(std::move(next), scene.num_cameras, level + 1);
  }
  return levels;
}

ClusterResult LabelsFromHierarchy(const Scene& scene,
                                  const std::vector<HierarchyLevel>& levels) {
  ClusterResult result;
  result.scene_id = scene.scene_id;
  result.levels_run = static_cast<int>(levels.size());
  for (const HierarchyLevel& h : levels) {
    result.trace.push_back({h.graph.num_nodes(), h.graph.num_edges(),
                            h.refined.num_edges(), h.components.size()});
  }
  const int n = static_cast<int>(scene.detections.size());
  std::vector<int> raw(n, -1);
  const HierarchyLevel& last = levels.back();
  for (int v = 0; v < last.graph.num_nodes(); ++v) {
    for (int member : last.graph.nodes[v].member_ids) {
      raw[member] = last.components.component_of[v];
    }
  }
  std::vector<int> remap(last.components.size(), -1);
  int next_label = 0;
  result.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    if (raw[i] < 0) throw Error(ErrorCode::kInvalidArgument, "detection lost its cluster");
    if (remap[raw[i]] < 0) remap[raw[i]] = next_label++;
    result.labels[i] = remap[raw[i]];
  }
  return result;
}

ClusterResult Cluster(const Scene& scene, const ModelParams& params,
                      const DecodeConfig& cfg) {
  const LevelScorer scorer = [&params](const AffinityGraph& g) {
    LevelScores s;
    s.candidate = PredictGraph(g, params);
    s.density = NodeDensity(g, s.candidate);
    s.select.reserve(s.candidate.size());
    for (double r : s.candidate) s.select.push_back(EdgeCoefficient(r));
    return s;
  };
  return LabelsFromHierarchy(scene, RunHierarchy(scene, cfg, scorer));
}

std::string SerializeClusterResults(const std::vector<ClusterResult>& results) {
  nlohmann::json arr = nlohmann::json::array();
  for (const ClusterResult& r : results) {
    arr.push_back({{"scene_id", r.scene_id},
                   {"labels", r.labels},
                   {"levels_run", r.levels_run}});
  }
  return nlohmann::json{{"version", 1}, {"results", std::move(arr)}}.dump() + "\n";
}

std::vector<ClusterResult> ParseClusterResults(const std::string& json_text) {
  std::vector<ClusterResult> out;
  try {
    const nlohmann::json root = nlohmann::json::parse(json_text);
    for (const auto& jr : root.at("results")) {
      ClusterResult r;
      r.scene_id = jr.at("scene_id").get<std::string>();
      r.labels = jr.at("labels").get<std::vector<int>>();
      r.levels_run = jr.at("levels_run").get<int>();
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("cluster results: ") + e.what());
  }
  return out;
}

}  // namespace sgc
