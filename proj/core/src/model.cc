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

#include "sgc/model.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "sgc/errors.h"

namespace sgc {

ModelConfig ModelConfig::WithSteps(int embed_dim, int steps, int width, int final_dim,
                                   int theta_hidden) {
  ModelConfig c;
  c.embed_dim = embed_dim;
  c.step_dims.assign(std::max(steps, 1), width);
  c.step_dims.back() = final_dim;
  c.theta_hidden = theta_hidden;
  return c;
}

void ModelConfig::Validate() const {
  if (embed_dim < 1) throw Error(ErrorCode::kInvalidArgument, "embed_dim must be positive");
  if (step_dims.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one message-passing step");
  }
  for (int d : step_dims) {
    if (d < 1) throw Error(ErrorCode::kInvalidArgument, "step widths must be positive");
  }
  if (theta_hidden < 1) {
    throw Error(ErrorCode::kInvalidArgument, "theta_hidden must be positive");
  }
}

ModelParams ModelParams::ZerosLike() const {
  ModelParams z = *this;
  z.ForEachTensor([](const std::string&, Tensor& t) { t.setZero(); });
  return z;
}

std::size_t ModelParams::NumScalars() const {
  std::size_t n = 0;
  ForEachTensor([&n](const std::string&, const Tensor& t) { n += t.size(); });
  return n;
}

bool ModelParams::AllFinite() const {
  bool ok = true;
  ForEachTensor([&ok](const std::string&, const Tensor& t) { ok = ok && t.allFinite(); });
  return ok;
}

namespace {

Perceptron MakePerceptron(int in, int hidden, int out, Rng& rng) {
  auto uniform = [&rng](int rows, int cols, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    Tensor t(rows, cols);
    // Column-major fill order is part of the reproducibility contract.
    for (Eigen::Index c = 0; c < t.cols(); ++c) {
      for (Eigen::Index r = 0; r < t.rows(); ++r) t(r, c) = u(rng);
    }
    return t;
  };
  Perceptron p;
  p.w1 = uniform(hidden, in, in);
  p.b1 = uniform(1, hidden, in);
  p.slope = Tensor::Constant(1, 1, 0.25);
  p.w2 = uniform(out, hidden, hidden);
  p.b2 = uniform(1, out, hidden);
  return p;
}

inline double Prelu(double x, double slope) { return x > 0.0 ? x : slope * x; }

Tensor PreluMat(const Tensor& x, double slope) {
  return x.unaryExpr([slope](double v) { return Prelu(v, slope); });
}

// Hidden pre-activation and output of a perceptron applied row-wise.
void ApplyPerceptron(const Perceptron& p, const Tensor& x, Tensor& pre, Tensor& act,
                     Tensor& out) {
  pre = x * p.w1.transpose();
  pre.rowwise() += p.b1.row(0);
  act = PreluMat(pre, p.slope(0, 0));
  out = act * p.w2.transpose();
  out.rowwise() += p.b2.row(0);
}

void CheckDims(const GraphBatch& batch, const ModelParams& params) {
  if (batch.features.cols() != params.config.in_dim()) {
    throw Error(ErrorCode::kDimMismatch,
                "node features are " + std::to_string(batch.features.cols()) +
                    " wide, model expects " + std::to_string(params.config.in_dim()));
  }
}

}  // namespace

ModelParams InitParams(const ModelConfig& config, Rng& rng) {
  config.Validate();
  ModelParams params;
  params.config = config;
  int in = config.in_dim();
  for (int out : config.step_dims) {
    GcnStep step;
    step.psi = MakePerceptron(in, in, in, rng);
    step.phi = MakePerceptron(2 * in, out, out, rng);
    params.steps.push_back(std::move(step));
    in = out;
  }
  params.theta = MakePerceptron(2 * (config.out_dim() + 2), config.theta_hidden, 1, rng);
  params.theta.w2.setZero();
  params.theta.b2.setZero();
  return params;
}

GraphBatch MakeBatch(std::span<const AffinityGraph* const> graphs) {
  GraphBatch batch;
  int n = 0;
  int width = -1;
  for (const AffinityGraph* g : graphs) {
    n += g->num_nodes();
    for (const GraphNode& node : g->nodes) {
      if (width < 0) width = static_cast<int>(node.embedding.size());
      if (node.embedding.size() != width) {
        throw Error(ErrorCode::kDimMismatch, "node embeddings differ in width");
      }
    }
  }
  batch.features.resize(n, std::max(width, 0));
  batch.positions.resize(n, 2);

  int offset = 0;
  for (const AffinityGraph* g : graphs) {
    batch.graph_offsets.push_back(offset);
    const int gn = g->num_nodes();
    double lo[2] = {0, 0}, hi[2] = {0, 0};
    for (int i = 0; i < gn; ++i) {
      const double v[2] = {g->nodes[i].ground.gx, g->nodes[i].ground.gy};
      for (int a = 0; a < 2; ++a) {
        lo[a] = i == 0 ? v[a] : std::min(lo[a], v[a]);
        hi[a] = i == 0 ? v[a] : std::max(hi[a], v[a]);
      }
    }
    for (int i = 0; i < gn; ++i) {
      batch.features.row(offset + i) = g->nodes[i].embedding.transpose();
      const double v[2] = {g->nodes[i].ground.gx, g->nodes[i].ground.gy};
      for (int a = 0; a < 2; ++a) {
        const double span = hi[a] - lo[a];
        batch.positions(offset + i, a) = span < 1e-12 ? 0.5 : (v[a] - lo[a]) / span;
      }
    }

    std::vector<double> abs_in(gn, 0.0);
    for (const Edge& e : g->edges) abs_in[e.dst] += std::abs(e.a);
    for (const Edge& e : g->edges) {
      batch.edges.push_back({e.src + offset, e.dst + offset, e.a});
      batch.agg_weight.push_back(abs_in[e.dst] < 1e-12 ? 0.0 : e.a / abs_in[e.dst]);
    }
    offset += gn;
  }
  batch.graph_offsets.push_back(offset);
  return batch;
}

GraphBatch MakeBatch(const AffinityGraph& graph) {
  const AffinityGraph* one[] = {&graph};
  return MakeBatch(one);
}

Tensor GcnForward(const GraphBatch& batch, const ModelParams& params,
                  const ForwardOptions& options, ForwardTape* tape) {
  CheckDims(batch, params);
  const bool drop = options.training && options.dropout > 0.0;
  if (drop && options.rng == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "dropout needs an rng");
  }
  if (options.dropout < 0.0 || options.dropout >= 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "dropout must lie in [0, 1)");
  }
  if (tape) tape->steps.clear();

  Tensor x = batch.features;
  const int n = batch.num_nodes();
  for (const GcnStep& step : params.steps) {
    StepTape st;
    Tensor psi_act;
    ApplyPerceptron(step.psi, x, st.psi_pre, psi_act, st.psi_out);

    const Eigen::Index d = x.cols();
    st.concat.resize(n, 2 * d);
    st.concat.leftCols(d) = x;
    st.concat.rightCols(d).setZero();
    for (int e = 0; e < batch.num_edges(); ++e) {
      const Edge& edge = batch.edges[e];
      st.concat.row(edge.dst).tail(d) += batch.agg_weight[e] * st.psi_out.row(edge.src);
    }

    ApplyPerceptron(step.phi, st.concat, st.phi_pre, st.phi_act, st.phi_out);
    if (params.config.normalize_steps) {
      st.norms = st.phi_out.rowwise().norm().cwiseMax(1e-12);
      st.output = st.norms.cwiseInverse().asDiagonal() * st.phi_out;
    } else {
      st.output = st.phi_out;
    }
    if (drop) {
      const double keep = 1.0 - options.dropout;
      std::bernoulli_distribution coin(keep);
      st.dropout_mask.resize(st.output.rows(), st.output.cols());
      for (Eigen::Index c = 0; c < st.dropout_mask.cols(); ++c) {
        for (Eigen::Index r = 0; r < st.dropout_mask.rows(); ++r) {
          st.dropout_mask(r, c) = coin(*options.rng) ? 1.0 / keep : 0.0;
        }
      }
      st.output = st.output.cwiseProduct(st.dropout_mask);
    }
    st.input = std::move(x);
    x = st.output;
    if (tape) tape->steps.push_back(std::move(st));
  }
  return x;
}

Eigen::VectorXd PredictEdges(const GraphBatch& batch, const Tensor& encoded,
                             const ModelParams& params, EdgeTape* tape) {
  const int out = params.config.out_dim();
  if (encoded.cols() != out || encoded.rows() != batch.num_nodes()) {
    throw Error(ErrorCode::kDimMismatch, "encoded nodes do not match the classifier");
  }
  const Perceptron& th = params.theta;
  const int m = out + 2;
  Tensor z(batch.num_nodes(), m);
  z.leftCols(out) = encoded;
  z.rightCols(2) = batch.positions;

  const Tensor u = z * th.w1.leftCols(m).transpose();
  const Tensor v = z * th.w1.rightCols(m).transpose();
  const int ne = batch.num_edges();
  Tensor pre(ne, th.hidden_dim());
  for (int e = 0; e < ne; ++e) {
    pre.row(e) = u.row(batch.edges[e].src) + v.row(batch.edges[e].dst) + th.b1.row(0);
  }
  Tensor act = PreluMat(pre, th.slope(0, 0));
  Eigen::VectorXd logits = act * th.w2.row(0).transpose();
  logits.array() += th.b2(0, 0);
  Eigen::VectorXd probs =
      logits.unaryExpr([](double l) { return 1.0 / (1.0 + std::exp(-l)); });

  if (tape) {
    tape->node_inputs = std::move(z);
    tape->pre = std::move(pre);
    tape->act = std::move(act);
    tape->logits = logits;
    tape->probs = probs;
  }
  return probs;
}

double PredictEdge(const Eigen::VectorXd& hi, const GroundPoint& pi,
                   const Eigen::VectorXd& hj, const GroundPoint& pj,
                   const ModelParams& params) {
  const int out = params.config.out_dim();
  if (hi.size() != out || hj.size() != out) {
    throw Error(ErrorCode::kDimMismatch, "encoded vectors do not match the classifier");
  }
  Eigen::VectorXd z(2 * (out + 2));
  z << hi, pi.gx, pi.gy, hj, pj.gx, pj.gy;
  const Perceptron& th = params.theta;
  Eigen::VectorXd pre = th.w1 * z + th.b1.row(0).transpose();
  const double slope = th.slope(0, 0);
  for (Eigen::Index k = 0; k < pre.size(); ++k) pre[k] = Prelu(pre[k], slope);
  const double logit = th.w2.row(0).dot(pre) + th.b2(0, 0);
  return 1.0 / (1.0 + std::exp(-logit));
}

std::vector<double> NodeDensity(const AffinityGraph& g, std::span<const double> probs) {
  if (static_cast<int>(probs.size()) != g.num_edges()) {
    throw Error(ErrorCode::kLengthMismatch, "need one probability per edge");
  }
  std::vector<double> sum(g.num_nodes(), 0.0);
  std::vector<int> degree(g.num_nodes(), 0);
  for (int e = 0; e < g.num_edges(); ++e) {
    const Edge& edge = g.edges[e];
    sum[edge.src] += EdgeCoefficient(probs[e]) * edge.a;
    ++degree[edge.src];
  }
  for (int i = 0; i < g.num_nodes(); ++i) {
    sum[i] = degree[i] == 0 ? 0.0 : sum[i] / degree[i];
  }
  return sum;
}

std::vector<double> PredictGraph(const AffinityGraph& g, const ModelParams& params) {
  const GraphBatch batch = MakeBatch(g);
  if (batch.num_edges() == 0) return {};
  const Tensor encoded = GcnForward(batch, params);
  const Eigen::VectorXd probs = PredictEdges(batch, encoded, params);
  return {probs.data(), probs.data() + probs.size()};
}

}  // namespace sgc
