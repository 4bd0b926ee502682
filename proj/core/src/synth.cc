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

#include "sgc/synth.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "sgc/errors.h"

namespace sgc {

void SynthConfig::Validate() const {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidArgument, "synth config: " + msg);
  };
  if (num_cameras < 2) fail("num_cameras must be >= 2");
  if (identities_min < 1 || identities_max < identities_min) {
    fail("identities range must satisfy 1 <= min <= max");
  }
  if (!(visibility_prob > 0.0 && visibility_prob <= 1.0)) {
    fail("visibility_prob must lie in (0, 1]");
  }
  if (!(appearance_noise >= 0.0) || !(position_noise >= 0.0)) {
    fail("noise levels must be non-negative");
  }
  if (!(arena_width > 0.0) || !(arena_height > 0.0)) fail("arena must be positive");
  if (embed_dim < 2) fail("embed_dim must be >= 2");
  if (num_scenes < 0) fail("num_scenes must be >= 0");
}

namespace {

Eigen::VectorXd GaussianVector(int dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dim);
  for (int k = 0; k < dim; ++k) v[k] = normal(rng);
  return v;
}

Eigen::VectorXd RandomUnitVector(int dim, Rng& rng) {
  for (;;) {
    Eigen::VectorXd v = GaussianVector(dim, rng);
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

// Rotates `base` by `angle` towards a random direction orthogonal to it.
Eigen::VectorXd Rotate(const Eigen::VectorXd& base, double angle, Rng& rng) {
  if (angle == 0.0) return base;
  for (;;) {
    Eigen::VectorXd u = GaussianVector(static_cast<int>(base.size()), rng);
    u -= u.dot(base) * base;
    const double n = u.norm();
    if (n < 1e-12) continue;
    u /= n;
    Eigen::VectorXd out = std::cos(angle) * base + std::sin(angle) * u;
    return out / out.norm();
  }
}

}  // namespace

std::vector<IdentityBasis> SampleIdentityBases(const SynthConfig& cfg, int count,
                                               Rng& rng) {
  std::uniform_real_distribution<double> ux(0.0, cfg.arena_width);
  std::uniform_real_distribution<double> uy(0.0, cfg.arena_height);
  std::vector<IdentityBasis> bases;
  bases.reserve(count);
  for (int k = 0; k < count; ++k) {
    IdentityBasis b;
    b.embedding = RandomUnitVector(cfg.embed_dim, rng);
    b.ground.gx = ux(rng);
    b.ground.gy = uy(rng);
    bases.push_back(std::move(b));
  }
  return bases;
}

Scene GenerateScene(const SynthConfig& cfg, const std::vector<IdentityBasis>& bases,
                    Rng& rng, std::string scene_id) {
  if (bases.empty()) {
    throw Error(ErrorCode::kEmptyScene, "no identities to place in the scene");
  }
  const int num_ids = static_cast<int>(bases.size());
  std::bernoulli_distribution visible(cfg.visibility_prob);
  std::normal_distribution<double> angle_noise(0.0, cfg.appearance_noise);
  std::normal_distribution<double> pos_noise(0.0, cfg.position_noise);

  // seen[identity][camera]
  std::vector<std::vector<bool>> seen(num_ids, std::vector<bool>(cfg.num_cameras));
  for (int id = 0; id < num_ids; ++id) {
    bool any = false;
    while (!any) {
      for (int cam = 0; cam < cfg.num_cameras; ++cam) {
        seen[id][cam] = visible(rng);
        any = any || seen[id][cam];
      }
    }
  }

  Scene scene;
  scene.scene_id = std::move(scene_id);
  scene.num_cameras = cfg.num_cameras;
  std::vector<int> order(num_ids);
  for (int cam = 0; cam < cfg.num_cameras; ++cam) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (int id : order) {
      if (!seen[id][cam]) continue;
      const IdentityBasis& b = bases[id];
      Detection d;
      d.camera_id = cam;
      const double angle =
          cfg.appearance_noise > 0.0 ? std::abs(angle_noise(rng)) : 0.0;
      d.embedding = Rotate(b.embedding, angle, rng);
      d.ground = b.ground;
      if (cfg.position_noise > 0.0) {
        d.ground.gx += pos_noise(rng);
        d.ground.gy += pos_noise(rng);
      }
      d.identity = id;
      scene.detections.push_back(std::move(d));
    }
  }
  if (scene.detections.empty()) {
    throw Error(ErrorCode::kEmptyScene, "no detection was drawn");
  }
  return scene;
}

Scene GenerateSceneAt(const SynthConfig& cfg, int scene_index) {
  Rng rng(DeriveSeed(DeriveSeed(cfg.seed, "generation"),
                     static_cast<std::uint64_t>(scene_index)));
  std::uniform_int_distribution<int> count(cfg.identities_min, cfg.identities_max);
  const int num_ids = count(rng);
  const std::vector<IdentityBasis> bases = SampleIdentityBases(cfg, num_ids, rng);
  return GenerateScene(cfg, bases, rng, "scene_" + std::to_string(scene_index));
}

Dataset GenerateDataset(const SynthConfig& cfg) {
  cfg.Validate();
  Dataset dataset;
  dataset.num_cameras = cfg.num_cameras;
  dataset.embed_dim = cfg.embed_dim;
  dataset.scenes.reserve(cfg.num_scenes);
  for (int i = 0; i < cfg.num_scenes; ++i) {
    dataset.scenes.push_back(GenerateSceneAt(cfg, i));
  }
  return dataset;
}

}  // namespace sgc
