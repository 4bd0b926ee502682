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

#include <set>

#include <gtest/gtest.h>

#include "sgc/errors.h"

namespace sgc {
namespace {

SynthConfig Small() {
  SynthConfig cfg;
  cfg.embed_dim = 16;
  cfg.num_scenes = 20;
  cfg.seed = 5;
  return cfg;
}

TEST(GenerateSceneTest, FullVisibilityCountsEveryPair) {
  SynthConfig cfg = Small();
  cfg.visibility_prob = 1.0;
  Rng rng(1);
  const auto bases = SampleIdentityBases(cfg, 5, rng);
  const Scene s = GenerateScene(cfg, bases, rng, "s");
  EXPECT_EQ(s.detections.size(), 20u);
}

TEST(GenerateSceneTest, ZeroNoiseRepeatsIdentityExactly) {
  SynthConfig cfg = Small();
  cfg.appearance_noise = 0.0;
  cfg.position_noise = 0.0;
  Rng rng(2);
  const auto bases = SampleIdentityBases(cfg, 6, rng);
  const Scene s = GenerateScene(cfg, bases, rng, "s");
  for (const Detection& d : s.detections) {
    EXPECT_EQ(d.embedding, bases[*d.identity].embedding);
    EXPECT_EQ(d.ground, bases[*d.identity].ground);
  }
}

TEST(GenerateSceneTest, SameSeedIsBitIdentical) {
  const SynthConfig cfg = Small();
  const Dataset a = GenerateDataset(cfg);
  const Dataset b = GenerateDataset(cfg);
  EXPECT_EQ(SerializeDataset(a), SerializeDataset(b));
}

TEST(GenerateSceneTest, NoiseRotatesAwayFromBase) {
  SynthConfig cfg = Small();
  cfg.appearance_noise = 0.2;
  Rng rng(4);
  const auto bases = SampleIdentityBases(cfg, 4, rng);
  const Scene s = GenerateScene(cfg, bases, rng, "s");
  for (const Detection& d : s.detections) {
    EXPECT_NEAR(d.embedding.norm(), 1.0, 1e-12);
    EXPECT_LT(d.embedding.dot(bases[*d.identity].embedding), 1.0);
  }
}

TEST(GenerateSceneTest, EmptyBasisListIsAnEmptyScene) {
  SynthConfig cfg = Small();
  Rng rng(0);
  try {
    GenerateScene(cfg, {}, rng, "s");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyScene);
  }
}

TEST(GenerateDatasetTest, ZeroScenes) {
  SynthConfig cfg = Small();
  cfg.num_scenes = 0;
  EXPECT_TRUE(GenerateDataset(cfg).scenes.empty());
}

TEST(GenerateDatasetTest, IdentityCountWithinRange) {
  SynthConfig cfg = Small();
  cfg.num_scenes = 200;
  for (const Scene& s : GenerateDataset(cfg).scenes) {
    std::set<int> ids;
    for (const Detection& d : s.detections) ids.insert(*d.identity);
    EXPECT_GE(ids.size(), 2u);
    EXPECT_LE(ids.size(), 9u);
  }
}

TEST(GenerateDatasetTest, ScenesAreIndependentOfOrder) {
  SynthConfig cfg = Small();
  const Dataset ds = GenerateDataset(cfg);
  // Scene 7 on its own equals scene 7 of the full run.
  const Scene alone = GenerateSceneAt(cfg, 7);
  Dataset one;
  one.num_cameras = cfg.num_cameras;
  one.embed_dim = cfg.embed_dim;
  one.scenes = {alone};
  Dataset seventh = one;
  seventh.scenes = {ds.scenes[7]};
  EXPECT_EQ(SerializeDataset(one), SerializeDataset(seventh));
}

TEST(GenerateDatasetTest, UnitNormAndDistinctBases) {
  SynthConfig cfg = Small();
  cfg.appearance_noise = 0.0;
  cfg.position_noise = 0.0;
  cfg.num_scenes = 100;
  for (const Scene& s : GenerateDataset(cfg).scenes) {
    for (const Detection& a : s.detections) {
      EXPECT_NEAR(a.embedding.norm(), 1.0, 1e-9);
      for (const Detection& b : s.detections) {
        if (*a.identity != *b.identity) {
          EXPECT_LT(a.embedding.dot(b.embedding), 1.0 - 1e-6);
        }
      }
    }
  }
}

TEST(SynthConfigTest, Validation) {
  auto rejects = [](auto mutate) {
    SynthConfig cfg;
    mutate(cfg);
    try {
      cfg.Validate();
    } catch (const Error& e) {
      return e.code() == ErrorCode::kInvalidArgument;
    }
    return false;
  };
  EXPECT_TRUE(rejects([](SynthConfig& c) { c.num_cameras = 1; }));
  EXPECT_TRUE(rejects([](SynthConfig& c) { c.visibility_prob = 0.0; }));
  EXPECT_TRUE(rejects([](SynthConfig& c) { c.visibility_prob = 1.5; }));
  EXPECT_TRUE(rejects([](SynthConfig& c) { c.embed_dim = 1; }));
  EXPECT_TRUE(rejects([](SynthConfig& c) { c.identities_max = 1; }));
  EXPECT_TRUE(rejects([](SynthConfig& c) { c.appearance_noise = -0.1; }));
  EXPECT_NO_THROW(SynthConfig().Validate());
}

}  // namespace
}  // namespace sgc
