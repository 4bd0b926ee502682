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

#ifndef SGC_TRAINING_H_
#define SGC_TRAINING_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgc/dataio.h"
#include "sgc/decode.h"
#include "sgc/groundtruth.h"
#include "sgc/metrics.h"
#include "sgc/model.h"

namespace sgc {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  int epochs = 200;
  int batch_size = 48;  // graphs per batch
  double base_lr = 0.07;
  double dropout = 0.1;
  double p_tau = 0.2;
  int levels = 3;
  int mp_steps = 2;
  double warmup_fraction = 0.1;
  AdamConfig adam;
  std::uint64_t seed = 0;

  // Model widths; the embedding width comes from the data.
  int gcn_width = 256;
  int final_dim = 48;
  int theta_hidden = 64;
  bool normalize_steps = true;

  void Validate() const;
  ModelConfig MakeModelConfig(int embed_dim) const;
  DecodeConfig MakeDecodeConfig() const { return {p_tau, levels}; }
};

inline constexpr double kProbClamp = 1e-7;

// Mean binary cross-entropy over edges with probabilities clamped to
// [1e-7, 1 - 1e-7]. Throws kEmptyEdgeSet for an empty edge set.
double EdgeBceLoss(std::span<const double> probs, std::span<const int> labels);

struct LossAndGradients {
  double loss = 0.0;
  int num_edges = 0;
  GradientSet grads;
};

// Forward pass, loss and exact reverse-mode gradients for one batch. With
// options.training and dropout > 0 the dropout masks come from options.rng.
LossAndGradients Backward(const GraphBatch& batch, std::span<const int> labels,
                          const ModelParams& params, const ForwardOptions& options = {});

// Loss only, same forward path as Backward.
double BatchLoss(const GraphBatch& batch, std::span<const int> labels,
                 const ModelParams& params, const ForwardOptions& options = {});

// Linear warmup from 0 to base_lr over floor(warmup_fraction * total) steps,
// then base_lr * (1 + cos(pi * t)) / 2 with t the post-warmup progress.
double OneCycleLr(std::int64_t step, std::int64_t total_steps, double base_lr,
                  double warmup_fraction);

struct AdamState {
  ModelParams m;
  ModelParams v;
  std::int64_t t = 0;
};

AdamState MakeAdamState(const ModelParams& params);
void AdamStep(ModelParams& params, const GradientSet& grads, AdamState& state, double lr,
              const AdamConfig& cfg);

// Ground-truth graphs of every level of every scene. Graphs without edges
// carry no supervision and are left out.
std::vector<LabeledGraph> BuildGtPool(std::span<const Scene> scenes,
                                      const DecodeConfig& cfg);

// Merges the selected pool graphs into one batch and concatenates labels.
GraphBatch MakeLabeledBatch(std::span<const LabeledGraph* const> graphs,
                            std::vector<int>* labels);

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;  // edge-weighted mean over the epoch's batches
  double lr = 0.0;    // rate used by the epoch's last batch
  std::optional<MetricsReport> val;
};

struct TrainResult {
  ModelParams best;
  ModelParams final;
  int best_epoch = 0;  // 0 = initial parameters
  double best_v_measure = -1.0;
  std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Adam over shuffled mini-batches of the pooled ground-truth graphs. After
// every epoch the validation scenes are clustered and the parameters with
// the best V-measure are kept. Without validation scenes, best = final.
TrainResult Train(std::span<const Scene> train_scenes, std::span<const Scene> val_scenes,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

std::string SerializeHistory(const std::vector<EpochRecord>& history);

}  // namespace sgc

#endif  // SGC_TRAINING_H_
