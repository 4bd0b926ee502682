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

#ifndef SGC_GROUNDTRUTH_H_
#define SGC_GROUNDTRUTH_H_

#include <span>
#include <vector>

#include "sgc/affinity.h"
#include "sgc/dataio.h"
#include "sgc/decode.h"

namespace sgc {

// An affinity graph with supervision: one identity per node and a 0/1 label
// per directed edge telling whether both endpoints share that identity.
struct LabeledGraph {
  AffinityGraph graph;
  std::vector<int> node_identity;
  std::vector<int> edge_labels;
};

// d_i = (1/k) sum over i's k out-edges of (+a_ij if same identity, -a_ij
// otherwise); 0 for nodes without out-edges.
std::vector<double> GtDensity(const AffinityGraph& g, std::span<const int> identities);

// Identity of every node: the majority identity of its member detections,
// lowest identity on ties. Throws kMissingLabel for unlabeled detections.
std::vector<int> NodeIdentities(const AffinityGraph& g, const Scene& scene);

LabeledGraph LabelGraph(const AffinityGraph& g, const Scene& scene);

struct GtHierarchy {
  std::vector<LabeledGraph> graphs;  // one per level
  ClusterResult result;
};

// Runs the hierarchy with label-derived densities, candidates a_ij >= p_tau
// and argmax-a_ij selection, recording each level's graph.
GtHierarchy RunGtHierarchy(const Scene& scene, const DecodeConfig& cfg);

std::vector<LabeledGraph> BuildGtHierarchy(const Scene& scene, double p_tau, int levels);

}  // namespace sgc

#endif  // SGC_GROUNDTRUTH_H_
