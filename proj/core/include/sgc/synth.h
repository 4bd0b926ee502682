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

#ifndef SGC_SYNTH_H_
#define SGC_SYNTH_H_

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "sgc/dataio.h"
#include "sgc/rng.h"

namespace sgc {

// Seeded stand-in for a re-identification backbone observing a multi-camera
// scene: each identity gets a random unit appearance vector and a ground
// position, and every camera that sees it reports a perturbed copy of both.
struct SynthConfig {
  int num_cameras = 4;
  int identities_min = 2;
  int identities_max = 9;
  double visibility_prob = 0.8;
  double appearance_noise = 0.2;  // radians
  double position_noise = 2.0;    // ground units
  double arena_width = 100.0;
  double arena_height = 100.0;
  int embed_dim = 256;
  int num_scenes = 100;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct IdentityBasis {
  Eigen::VectorXd embedding;  // unit norm
  GroundPoint ground;
};

// Draws `count` bases: directions uniform on the sphere, positions uniform
// inside the arena.
std::vector<IdentityBasis> SampleIdentityBases(const SynthConfig& cfg, int count,
                                               Rng& rng);

// Identity k of `bases` carries label k. An identity that would be invisible
// in every camera has its visibility redrawn, so each one appears at least
// once. Throws kEmptyScene only when `bases` is empty.
Scene GenerateScene(const SynthConfig& cfg, const std::vector<IdentityBasis>& bases,
                    Rng& rng, std::string scene_id = "scene");

// Scene i uses its own stream seeded from (cfg.seed, i), so any subset of
// scenes can be regenerated independently.
Dataset GenerateDataset(const SynthConfig& cfg);

Scene GenerateSceneAt(const SynthConfig& cfg, int scene_index);

}  // namespace sgc

#endif  // SGC_SYNTH_H_
