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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "json.hpp"
#include "sgc/errors.h"
#include "sgc/rng.h"

namespace sgc {

void TrainConfig::Validate() const {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidArgument, "train config: " + msg);
  };
  if (epochs < 0) fail("epochs must be >= 0");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (!(base_lr > 0.0)) fail("base_lr must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must lie in [0, 1)");
  if (!std::isfinite(p_tau)) fail("p_tau must be finite");
  if (levels < 1) fail("levels must be >= 1");
  if (mp_steps < 1) fail("mp_steps must be >= 1");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) {
    fail("warmup_fraction must lie in [0, 1)");
  }
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) ||
      !(adam.eps > 0.0)) {
    fail("invalid Adam settings");
  }
  if (gcn_width < 1 || final_dim < 1 || theta_hidden < 1) fail("widths must be positive");
}

ModelConfig TrainConfig::MakeModelConfig(int embed_dim) const {
  ModelConfig mc = ModelConfig::WithSteps(embed_dim, mp_steps, gcn_width, final_dim, theta_hidden);
  mc.normalize_steps = normalize_steps;
  return mc;
}

double EdgeBceLoss(std::span<const double> probs, std::span<const int> labels) {
  if (probs.size() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, "need one label per edge");
  }
  if (probs.empty()) throw Error(ErrorCode::kEmptyEdgeSet, "batch has no edges");
  double sum = 0.0;
  for (std::size_t e = 0; e < probs.size(); ++e) {
    // Clamp the probability of the observed label so the worst case costs
    // exactly -log(1e-7).
    const double p = labels[e] != 0 ? probs[e] : 1.0 - probs[e];
    sum += std::log(std::clamp(p, kProbClamp, 1.0 - kProbClamp));
  }
  return -sum / static_cast<double>(probs.size());
}

namespace {

double PreluGrad(double x, double slope) { return x > 0.0 ? 1.0 : slope; }

// Backprop through out = PReLU(x W1^T + b1) W2^T + b2 given d(out).
// Accumulates parameter gradients into `g` and returns d(x).
Tensor PerceptronBackward(const Perceptron& p, const Tensor& x, const Tensor& pre,
                          const Tensor& d_out, Perceptron& g) {
  const double slope = p.slope(0, 0);
  const Tensor act = pre.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
  g.w2.noalias() += d_out.transpose() * act;
  g.b2 += d_out.colwise().sum();
  const Tensor d_act = d_out * p.w2;
  Tensor d_pre(pre.rows(), pre.cols());
  double d_slope = 0.0;
  for (Eigen::Index c = 0; c < pre.cols(); ++c) {
    for (Eigen::Index r = 0; r < pre.rows(); ++r) {
      const double v = pre(r, c);
      d_pre(r, c) = d_act(r, c) * PreluGrad(v, slope);
      if (v <= 0.0) d_slope += d_act(r, c) * v;
    }
  }
  g.slope(0, 0) += d_slope;
  g.w1.noalias() += d_pre.transpose() * x;
  g.b1 += d_pre.colwise().sum();
  return d_pre * p.w1;
}

struct ForwardResult {
  ForwardTape tape;
  double loss = 0.0;
};

ForwardResult RunForward(const GraphBatch& batch, std::span<const int> labels,
                         const ModelParams& params, const ForwardOptions& options) {
  if (static_cast<int>(labels.size()) != batch.num_edges()) {
    throw Error(ErrorCode::kLengthMismatch, "need one label per edge");
  }
  if (batch.num_edges() == 0) throw Error(ErrorCode::kEmptyEdgeSet, "batch has no edges");
  ForwardResult out;
  const Tensor encoded = GcnForward(batch, params, options, &out.tape);
  const Eigen::VectorXd probs = PredictEdges(batch, encoded, params, &out.tape.edges);
  out.loss = EdgeBceLoss({probs.data(), static_cast<std::size_t>(probs.size())}, labels);
  return out;
}

}  // namespace

double BatchLoss(const GraphBatch& batch, std::span<const int> labels,
                 const ModelParams& params, const ForwardOptions& options) {
  return RunForward(batch, labels, params, options).loss;
}

LossAndGradients Backward(const GraphBatch& batch, std::span<const int> labels,
                          const ModelParams& params, const ForwardOptions& options) {
  ForwardResult fwd = RunForward(batch, labels, params, options);
  const ForwardTape& tape = fwd.tape;
  LossAndGradients result;
  result.loss = fwd.loss;
  result.num_edges = batch.num_edges();
  result.grads = params.ZerosLike();
  GradientSet& grads = result.grads;

  // Edge classifier.
  const int ne = batch.num_edges();
  const EdgeTape& et = tape.edges;
  Eigen::VectorXd d_logit(ne);
  for (int e = 0; e < ne; ++e) {
    const double r = et.probs[e];
    const bool clamped = r < kProbClamp || r > 1.0 - kProbClamp;
    d_logit[e] = clamped ? 0.0 : (r - (labels[e] != 0 ? 1.0 : 0.0)) / ne;
  }
  const Perceptron& th = params.theta;
  Perceptron& gth = grads.theta;
  const double slope = th.slope(0, 0);
  gth.w2.row(0) += (et.act.transpose() * d_logit).transpose();
  gth.b2(0, 0) += d_logit.sum();
  Tensor d_pre = d_logit * th.w2.row(0);  // E x hidden
  double d_slope = 0.0;
  for (Eigen::Index c = 0; c < d_pre.cols(); ++c) {
    for (Eigen::Index r = 0; r < d_pre.rows(); ++r) {
      const double v = et.pre(r, c);
      if (v <= 0.0) d_slope += d_pre(r, c) * v;
      d_pre(r, c) *= PreluGrad(v, slope);
    }
  }
  gth.slope(0, 0) += d_slope;
  gth.b1 += d_pre.colwise().sum();

  const int n = batch.num_nodes();
  const int m = static_cast<int>(et.node_inputs.cols());
  Tensor d_u = Tensor::Zero(n, th.hidden_dim());
  Tensor d_v = Tensor::Zero(n, th.hidden_dim());
  for (int e = 0; e < ne; ++e) {
    d_u.row(batch.edges[e].src) += d_pre.row(e);
    d_v.row(batch.edges[e].dst) += d_pre.row(e);
  }
  gth.w1.leftCols(m) += d_u.transpose() * et.node_inputs;
  gth.w1.rightCols(m) += d_v.transpose() * et.node_inputs;
  const Tensor d_z = d_u * th.w1.leftCols(m) + d_v * th.w1.rightCols(m);
  Tensor d_x = d_z.leftCols(params.config.out_dim());

  // Message-passing steps, last to first.
  for (int s = static_cast<int>(params.steps.size()) - 1; s >= 0; --s) {
    const GcnStep& step = params.steps[s];
    GcnStep& gstep = grads.steps[s];
    const StepTape& st = tape.steps[s];
    Tensor d_out = st.dropout_mask.size() == 0 ? d_x : Tensor(d_x.cwiseProduct(st.dropout_mask));
    if (st.norms.size() > 0) {
      // y = x / |x|  =>  dx = (dy - y <y, dy>) / |x|
      const Eigen::VectorXd inv = st.norms.cwiseInverse();
      const Tensor y = inv.asDiagonal() * st.phi_out;
      const Eigen::VectorXd proj = y.cwiseProduct(d_out).rowwise().sum();
      d_out = inv.asDiagonal() * (d_out - proj.asDiagonal() * y);
    }

    const Tensor d_concat = PerceptronBackward(step.phi, st.concat, st.phi_pre, d_out, gstep.phi);
    const Eigen::Index d = st.input.cols();
    d_x = d_concat.leftCols(d);
    Tensor d_psi_out = Tensor::Zero(n, d);
    for (int e = 0; e < ne; ++e) {
      d_psi_out.row(batch.edges[e].src) +=
          batch.agg_weight[e] * d_concat.row(batch.edges[e].dst).tail(d);
    }
    d_x += PerceptronBackward(step.psi, st.input, st.psi_pre, d_psi_out, gstep.psi);
  }

  if (!std::isfinite(result.loss) || !grads.AllFinite()) {
    throw Error(ErrorCode::kNonFiniteGradient, "loss or gradient is not finite");
  }
  return result;
}

double OneCycleLr(std::int64_t step, std::int64_t total_steps, double base_lr,
                  double warmup_fraction) {
  if (total_steps <= 0 || step < 0 || step >= total_steps) {
    throw Error(ErrorCode::kInvalidArgument, "step outside [0, total_steps)");
  }
  const auto warmup = static_cast<std::int64_t>(
      std::floor(warmup_fraction * static_cast<double>(total_steps)));
  if (step < warmup) {
    return base_lr * static_cast<double>(step) / static_cast<double>(warmup);
  }
  const double t =
      static_cast<double>(step - warmup) / static_cast<double>(total_steps - warmup);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

AdamState MakeAdamState(const ModelParams& params) {
  return {params.ZerosLike(), params.ZerosLike(), 0};
}

void AdamStep(ModelParams& params, const GradientSet& grads, AdamState& state, double lr,
              const AdamConfig& cfg) {
  ++state.t;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  std::vector<Tensor*> p, g, m, v;
  params.ForEachTensor([&p](const std::string&, Tensor& t) { p.push_back(&t); });
  const_cast<GradientSet&>(grads).ForEachTensor(
      [&g](const std::string&, Tensor& t) { g.push_back(&t); });
  state.m.ForEachTensor([&m](const std::string&, Tensor& t) { m.push_back(&t); });
  state.v.ForEachTensor([&v](const std::string&, Tensor& t) { v.push_back(&t); });
  if (g.size() != p.size() || m.size() != p.size()) {
    throw Error(ErrorCode::kDimMismatch, "gradient does not match parameters");
  }
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (g[k]->rows() != p[k]->rows() || g[k]->cols() != p[k]->cols()) {
      throw Error(ErrorCode::kDimMismatch, "gradient tensor shape mismatch");
    }
    auto pa = p[k]->array();
    auto ga = g[k]->array();
    auto ma = m[k]->array();
    auto va = v[k]->array();
    ma = cfg.beta1 * ma + (1.0 - cfg.beta1) * ga;
    va = cfg.beta2 * va + (1.0 - cfg.beta2) * ga.square();
    pa -= lr * (ma / c1) / ((va / c2).sqrt() + cfg.eps);
  }
}

std::vector<LabeledGraph> BuildGtPool(std::span<const Scene> scenes, const DecodeConfig& cfg) {
  std::vector<LabeledGraph> pool;
  for (const Scene& scene : scenes) {
    if (scene.detections.empty()) continue;
    for (LabeledGraph& lg : RunGtHierarchy(scene, cfg).graphs) {
      if (lg.graph.num_edges() > 0) pool.push_back(std::move(lg));
    }
  }
  return pool;
}

GraphBatch MakeLabeledBatch(std::span<const LabeledGraph* const> graphs,
                            std::vector<int>* labels) {
  std::vector<const AffinityGraph*> raw;
  raw.reserve(graphs.size());
  labels->clear();
  for (const LabeledGraph* lg : graphs) {
    raw.push_back(&lg->graph);
    labels->insert(labels->end(), lg->edge_labels.begin(), lg->edge_labels.end());
  }
  return MakeBatch(raw);
}

TrainResult Train(std::span<const Scene> train_scenes, std::span<const Scene> val_scenes,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.Validate();
  for (const Scene& s : train_scenes) {
    if (!s.FullyLabeled()) {
      throw Error(ErrorCode::kMissingLabel, "training requires identity labels");
    }
  }
  const DecodeConfig decode = cfg.MakeDecodeConfig();
  const std::vector<LabeledGraph> pool = BuildGtPool(train_scenes, decode);
  if (pool.empty()) throw Error(ErrorCode::kEmptyPool, "no ground-truth graph has edges");
  const int embed_dim = static_cast<int>(pool.front().graph.nodes.front().embedding.size() / 2);

  Rng init_rng = MakeRng(cfg.seed, "init");
  Rng shuffle_rng = MakeRng(cfg.seed, "shuffle");
  Rng dropout_rng = MakeRng(cfg.seed, "dropout");

  TrainResult result;
  ModelParams params = InitParams(cfg.MakeModelConfig(embed_dim), init_rng);
  result.best = params;
  AdamState adam = MakeAdamState(params);

  const auto pool_size = static_cast<std::int64_t>(pool.size());
  const std::int64_t batches_per_epoch = (pool_size + cfg.batch_size - 1) / cfg.batch_size;
  const std::int64_t total_steps = batches_per_epoch * cfg.epochs;
  std::vector<int> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<const LabeledGraph*> chosen;
  std::vector<int> labels;
  ForwardOptions fwd{cfg.dropout, true, &dropout_rng};

  std::int64_t step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::int64_t edge_sum = 0;
    EpochRecord record;
    record.epoch = epoch;
    for (std::int64_t b = 0; b < batches_per_epoch; ++b, ++step) {
      chosen.clear();
      const std::int64_t end = std::min(pool_size, (b + 1) * cfg.batch_size);
      for (std::int64_t k = b * cfg.batch_size; k < end; ++k) chosen.push_back(&pool[order[k]]);
      const GraphBatch batch = MakeLabeledBatch(chosen, &labels);
      const LossAndGradients lg = Backward(batch, labels, params, fwd);
      record.lr = OneCycleLr(step, total_steps, cfg.base_lr, cfg.warmup_fraction);
      AdamStep(params, lg.grads, adam, record.lr, cfg.adam);
      if (!params.AllFinite()) {
        throw Error(ErrorCode::kNonFiniteGradient, "parameters diverged");
      }
      loss_sum += lg.loss * lg.num_edges;
      edge_sum += lg.num_edges;
    }
    record.loss = loss_sum / static_cast<double>(edge_sum);

    if (!val_scenes.empty()) {
      std::vector<ClusterResult> clusters;
      clusters.reserve(val_scenes.size());
      for (const Scene& s : val_scenes) clusters.push_back(Cluster(s, params, decode));
      record.val = Evaluate(val_scenes, clusters);
      if (record.val->v_measure > result.best_v_measure) {
        result.best_v_measure = record.val->v_measure;
        result.best_epoch = epoch;
        result.best = params;
      }
    } else {
      result.best_epoch = epoch;
      result.best = params;
    }
    result.history.push_back(record);
    if (on_epoch) on_epoch(record);
  }
  result.final = std::move(params);
  return result;
}

std::string SerializeHistory(const std::vector<EpochRecord>& history) {
  nlohmann::json arr = nlohmann::json::array();
  for (const EpochRecord& r : history) {
    nlohmann::json j{{"epoch", r.epoch}, {"loss", r.loss}, {"lr", r.lr}};
    if (r.val) {
      j["val"] = {{"ari", r.val->ari},
                  {"ami", r.val->ami},
                  {"homogeneity", r.val->homogeneity},
                  {"completeness", r.val->completeness},
                  {"v_measure", r.val->v_measure}};
    }
    arr.push_back(std::move(j));
  }
  return nlohmann::json{{"epochs", std::move(arr)}}.dump(2) + "\n";
}

}  // namespace sgc
