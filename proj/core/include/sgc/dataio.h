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

#ifndef SGC_DATAIO_H_
#define SGC_DATAIO_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sgc/geometry.h"

namespace sgc {

struct Detection {
  int camera_id = 0;
  std::optional<BBox> bbox;
  GroundPoint ground;
  Eigen::VectorXd embedding;
  std::optional<int> identity;
};

struct Scene {
  std::string scene_id;
  int num_cameras = 0;
  std::vector<Detection> detections;

  bool FullyLabeled() const;
};

struct Dataset {
  int version = 1;
  int num_cameras = 0;
  int embed_dim = 0;
  std::map<int, Homography> homographies;
  std::vector<Scene> scenes;

  bool FullyLabeled() const;
};

struct LoadOptions {
  LowerEdgeMode standing_point = LowerEdgeMode::kImageConvention;
};

// v / |v|. Throws kZeroVector when |v| < 1e-12, kNonFinite on NaN/inf.
Eigen::VectorXd NormalizeEmbedding(const Eigen::VectorXd& v);

// Checks M >= 2, camera ids, a common embedding width and finiteness.
void ValidateScene(const Scene& scene, int embed_dim);

// Parses the JSON dataset format. Embeddings come back unit-normalized and
// every detection has a resolved ground position: an explicit "ground"
// wins, otherwise the bbox is projected with its camera's homography.
Dataset ParseDataset(const std::string& json_text, const LoadOptions& options = {});
Dataset LoadDataset(const std::string& path, const LoadOptions& options = {});

std::string SerializeDataset(const Dataset& dataset);
void SaveDataset(const Dataset& dataset, const std::string& path);

// Small file helpers shared by the loaders; both throw kIoError.
std::string ReadTextFile(const std::string& path);
void WriteTextFile(const std::string& path, const std::string& contents);

}  // namespace sgc

#endif  // SGC_DATAIO_H_
