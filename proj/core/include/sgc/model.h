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

#ifndef SGC_MODEL_H_
#define SGC_MODEL_H_

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sgc/affinity.h"
#include "sgc/rng.h"

namespace sgc {

using Tensor = Eigen::MatrixXd;

// in -> hidden -> out with a trainable single-slope PReLU on the hidden
// layer. Weights are (out x in), biases (1 x out), slope (1 x 1).
struct Perceptron {
  Tensor w1, b1, slope, w2, b2;

  int in_dim() const { return static_cast<int>(w1.cols()); }
  int hidden_dim() const { return static_cast<int>(w1.rows()); }
  int out_dim() const { return static_cast<int>(w2.rows()); }
};

// One message-passing step: psi transforms neighbor embeddings before they
// are aggregated, phi maps [self, aggregate] to the step output.
struct GcnStep {
  Perceptron psi;
  Perceptron phi;
};

struct ModelConfig {
  int embed_dim = 256;                // D; node inputs are 2*D wide
  std::vector<int> step_dims{256, 48};  // output width of each step
  int theta_hidden = 64;
  // Scale every step output to unit L2 norm per node.
  bool normalize_steps = true;

  int in_dim() const { return 2 * embed_dim; }
  int num_steps() const { return static_cast<int>(step_dims.size()); }
  int out_dim() const { return step_dims.back(); }

  // `steps` message-passing steps: intermediate ones `width` wide, the last
  // one `final_dim` wide.
  static ModelConfig WithSteps(int embed_dim, int steps, int width = 256,
                               int final_dim = 48, int theta_hidden = 64);

  void Validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct ModelParams {
  ModelConfig config;
  std::vector<GcnStep> steps;
  Perceptron theta;

  // Visits every tensor with a stable name, in a fixed order.
  template <typename Fn>
  void ForEachTensor(Fn&& fn);
  template <typename Fn>
  void ForEachTensor(Fn&& fn) const;

  // Same shapes, all zeros. Used as a gradient accumulator.
  ModelParams ZerosLike() const;
  std::size_t NumScalars() const;
  bool AllFinite() const;
};

using GradientSet = ModelParams;

// Uniform fan-in initialization U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for
// weights and biases, PReLU slopes at 0.25, and a zero output layer for the
// edge classifier so an untrained model predicts 0.5 everywhere.
ModelParams InitParams(const ModelConfig& config, Rng& rng);

// Disjoint union of one or more affinity graphs laid out for the forward
// pass. Positions are min-max normalized to [0, 1] per source graph and axis
// (0.5 on a degenerate axis).
struct GraphBatch {
  Tensor features;              // n x 2D
  Tensor positions;             // n x 2
  std::vector<Edge> edges;      // global node indices
  std::vector<double> agg_weight;  // per edge: a_ji / sum_k |a_ki| at dst
  std::vector<int> graph_offsets;  // first node of each graph, plus n

  int num_nodes() const { return static_cast<int>(features.rows()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
};

GraphBatch MakeBatch(std::span<const AffinityGraph* const> graphs);
GraphBatch MakeBatch(const AffinityGraph& graph);

struct ForwardOptions {
  double dropout = 0.0;
  bool training = false;
  Rng* rng = nullptr;  // required when training with dropout > 0
};

// Intermediate values of one message-passing step, kept for backprop.
struct StepTape {
  Tensor input;       // X
  Tensor psi_pre;     // X W1^T + b1
  Tensor psi_out;     // Y
  Tensor concat;      // [X, aggregate]
  Tensor phi_pre;     // concat U1^T + c1
  Tensor phi_act;     // PReLU(phi_pre)
  Tensor phi_out;     // before normalization
  Eigen::VectorXd norms;  // per-row L2 norm of phi_out, empty if unused
  Tensor dropout_mask;  // empty when no dropout was applied
  Tensor output;
};

struct EdgeTape {
  Tensor node_inputs;  // [h', positions], n x (out + 2)
  Tensor pre;          // per edge hidden pre-activation, E x hidden
  Tensor act;          // PReLU(pre)
  Eigen::VectorXd logits;
  Eigen::VectorXd probs;
};

struct ForwardTape {
  std::vector<StepTape> steps;
  EdgeTape edges;
};

// Node encoder over a batch. Each step computes
//   h'_i = phi([h_i, sum_{j -> i} w_ji psi(h_j)])
// with w_ji the row-normalized adjacency over i's incoming edges (zero when
// i has none). With normalize_steps each output row is then scaled to unit
// length. Dropout is applied after every step in training mode only.
Tensor GcnForward(const GraphBatch& batch, const ModelParams& params,
                  const ForwardOptions& options = {}, ForwardTape* tape = nullptr);

// sigmoid(theta([h'_i, p_i, h'_j, p_j])) for every edge of the batch.
Eigen::VectorXd PredictEdges(const GraphBatch& batch, const Tensor& encoded,
                             const ModelParams& params, EdgeTape* tape = nullptr);

double PredictEdge(const Eigen::VectorXd& hi, const GroundPoint& pi,
                   const Eigen::VectorXd& hj, const GroundPoint& pj,
                   const ModelParams& params);

inline double EdgeCoefficient(double prob) { return 2.0 * prob - 1.0; }

// d_i = (1/k) sum over i's k outgoing edges of coef_ij * a_ij; 0 if k = 0.
std::vector<double> NodeDensity(const AffinityGraph& g, std::span<const double> probs);

// Convenience: encode a single graph in inference mode and score its edges.
std::vector<double> PredictGraph(const AffinityGraph& g, const ModelParams& params);

// ---- implementation details ----

template <typename Fn>
void ModelParams::ForEachTensor(Fn&& fn) {
  auto visit = [&fn](const std::string& prefix, Perceptron& p) {
    fn(prefix + ".w1", p.w1);
    fn(prefix + ".b1", p.b1);
    fn(prefix + ".slope", p.slope);
    fn(prefix + ".w2", p.w2);
    fn(prefix + ".b2", p.b2);
  };
  for (std::size_t s = 0; s < steps.size(); ++s) {
    visit("gcn" + std::to_string(s) + ".psi", steps[s].psi);
    visit("gcn" + std::to_string(s) + ".phi", steps[s].phi);
  }
  visit("theta", theta);
}

template <typename Fn>
void ModelParams::ForEachTensor(Fn&& fn) const {
  const_cast<ModelParams*>(this)->ForEachTensor(
      [&fn](const std::string& name, Tensor& t) { fn(name, static_cast<const Tensor&>(t)); });
}

}  // namespace sgc

#endif  // SGC_MODEL_H_
