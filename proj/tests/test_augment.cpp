// Copyright 2026 The depthseg Authors. All Rights Reserved.
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
#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <tuple>

#include "depthseg/augment.hpp"
#include "depthseg/errors.hpp"

namespace depthseg {
namespace {

Sample random_sample(Rng& rng, int64_t h, int64_t w, const std::string& id) {
  std::uniform_real_distribution<float> unit(0.f, 1.f);
  std::uniform_int_distribution<int> label(0, 4);
  Sample s;
  s.id = id;
  s.image = Image(h, w);
  for (auto& v : s.image.rgb) v = unit(rng);
  s.depth = DepthMap(h, w);
  s.labels = Grid<int32_t>(h, w);
  for (int64_t i = 0; i < h * w; ++i) {
    s.depth.valid.data[i] = unit(rng) < 0.9f;
    s.depth.values.data[i] = s.depth.valid.data[i] ? 0.1 + 50.0 * unit(rng) : 0.0;
    s.labels.data[i] = unit(rng) < 0.05f ? 255 : label(rng);
  }
  return s;
}

std::vector<Sample> random_batch(uint64_t seed, int n = 4, int64_t h = 16, int64_t w = 16) {
  Rng rng(seed);
  std::vector<Sample> batch;
  for (int i = 0; i < n; ++i) batch.push_back(random_sample(rng, h, w, "s" + std::to_string(i)));
  return batch;
}

using Tuple = std::tuple<float, float, float, double, uint8_t, int32_t>;

std::vector<Tuple> tuples(const std::vector<Sample>& batch) {
  std::vector<Tuple> out;
  for (const auto& s : batch) {
    for (int64_t r = 0; r < s.height(); ++r) {
      for (int64_t c = 0; c < s.width(); ++c) {
        out.emplace_back(s.image.at(r, c, 0), s.image.at(r, c, 1), s.image.at(r, c, 2), s.depth.values(r, c),
                         s.depth.valid(r, c), s.labels(r, c));
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool same_samples(const std::vector<Sample>& a, const std::vector<Sample>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (!(a[i].image == b[i].image && a[i].depth.values == b[i].depth.values &&
          a[i].depth.valid == b[i].depth.valid && a[i].labels == b[i].labels)) {
      return false;
    }
  }
  return true;
}

TEST(PatchMixup, ConservesTuplesWithDisjointEqualPatches) {
  // Four 4x4 tiles per 16x16 image on a diagonal, shuffled across the batch.
  for (uint64_t seed = 0; seed < 20; ++seed) {
    auto batch = random_batch(seed);
    PatchPlan plan;
    for (int i = 0; i < 4; ++i) {
      for (int k = 0; k < 4; ++k) plan.patches.push_back(Patch{i, 4 * k, 4 * ((k + i) % 4), 4});
    }
    plan.source.resize(plan.patches.size());
    std::iota(plan.source.begin(), plan.source.end(), size_t{0});
    Rng rng(seed);
    std::shuffle(plan.source.begin(), plan.source.end(), rng);
    auto mixed = batch;
    apply_patch_plan(mixed, plan);
    EXPECT_EQ(tuples(mixed), tuples(batch));
    if (seed == 0) EXPECT_FALSE(same_samples(mixed, batch));
  }
}

TEST(PatchMixup, SinglePatchPerImageConservesTuples) {
  AugConfig cfg;
  cfg.n_patches = 1;
  cfg.min_frac = cfg.max_frac = 0.25;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    auto batch = random_batch(100 + seed);
    Rng rng(seed);
    auto mixed = patch_mixup(batch, rng, cfg);
    EXPECT_EQ(tuples(mixed), tuples(batch));
  }
}

TEST(PatchMixup, ZeroPatchesIsIdentity) {
  AugConfig cfg;
  cfg.n_patches = 0;
  auto batch = random_batch(3);
  Rng rng(1);
  EXPECT_TRUE(same_samples(patch_mixup(batch, rng, cfg), batch));
}

TEST(PatchMixup, SameImageModeKeepsPixelsInTheirImage) {
  AugConfig cfg;
  cfg.n_patches = 2;
  cfg.min_frac = cfg.max_frac = 0.25;
  cfg.mixup_mode = MixupMode::SameImage;
  Rng rng(5);
  auto batch = random_batch(5);
  auto plan = plan_patch_mixup(batch, rng, cfg);
  for (size_t j = 0; j < plan.patches.size(); ++j) EXPECT_EQ(plan.patches[j].image, plan.patches[plan.source[j]].image);
}

TEST(PatchMixup, PatchSidesFollowTheFractionRange) {
  AugConfig cfg;
  EXPECT_EQ(patch_sizes(64, 64, cfg), (std::vector<int64_t>{8, 16, 24, 32}));
  Rng rng(2);
  auto plan = plan_patch_mixup(random_batch(2, 3, 64, 64), rng, cfg);
  ASSERT_EQ(plan.patches.size(), 12u);
  for (const auto& p : plan.patches) {
    EXPECT_GE(p.side, 8);
    EXPECT_LE(p.side, 32);
    EXPECT_LE(p.row + p.side, 64);
    EXPECT_LE(p.col + p.side, 64);
  }
  for (size_t j = 0; j < plan.patches.size(); ++j) EXPECT_EQ(plan.patches[j].side, plan.patches[plan.source[j]].side);
}

TEST(PatchMixup, RejectsBadInput) {
  AugConfig cfg;
  auto batch = random_batch(1, 2);
  batch.push_back(random_batch(2, 1, 8, 8).front());
  Rng rng(0);
  EXPECT_THROW(patch_mixup(batch, rng, cfg), DataError);
  PatchPlan plan{{Patch{0, 14, 14, 4}}, {0}};
  auto ok = random_batch(1, 1);
  EXPECT_THROW(apply_patch_plan(ok, plan), DataError);
}

TEST(Photometric, NeutralParametersAreIdentity) {
  auto s = random_batch(7, 1).front();
  Image img = s.image;
  apply_photometric(img, PhotometricParams{});
  EXPECT_EQ(img, s.image);
  AugConfig zero;
  zero.brightness = zero.contrast = zero.gamma = zero.hue = zero.saturation = zero.value = 0.0;
  Rng rng(0);
  EXPECT_EQ(photometric(s.image, rng, zero), s.image);
}

TEST(Photometric, GammaOnGray) {
  Image img(2, 2, 0.5f);
  PhotometricParams p;
  p.gamma = 2.0;
  apply_photometric(img, p);
  for (float v : img.rgb) EXPECT_FLOAT_EQ(v, 0.25f);
}

TEST(Photometric, StaysInUnitRange) {
  AugConfig cfg;
  cfg.brightness = 0.9;
  cfg.contrast = cfg.saturation = cfg.value = 0.9;
  cfg.hue = 0.5;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    auto out = photometric(random_batch(seed, 1).front().image, rng, cfg);
    for (float v : out.rgb) {
      EXPECT_GE(v, 0.f);
      EXPECT_LE(v, 1.f);
    }
  }
}

TEST(Flip, ProbabilityEndpointsAndInvolution) {
  auto s = random_batch(9, 1).front();
  Rng rng(0);
  auto never = hflip(s, rng, 0.0);
  EXPECT_TRUE(same_samples({never}, {s}));
  auto always = hflip(s, rng, 1.0);
  EXPECT_FALSE(same_samples({always}, {s}));
  for (int64_t r = 0; r < s.height(); ++r) {
    for (int64_t c = 0; c < s.width(); ++c) {
      EXPECT_EQ(always.labels(r, c), s.labels(r, s.width() - 1 - c));
      EXPECT_EQ(always.depth.valid(r, c), s.depth.valid(r, s.width() - 1 - c));
      EXPECT_EQ(always.image.at(r, c, 1), s.image.at(r, s.width() - 1 - c, 1));
    }
  }
  mirror(always);
  EXPECT_TRUE(same_samples({always}, {s}));
}

TEST(Augment, DeterministicForASeed) {
  AugConfig cfg;
  cfg.mixup_prob = 1.0;
  cfg.min_frac = 0.25;
  auto batch = random_batch(11);
  Rng a(42), b(42), c(43);
  auto x = augment_batch(batch, a, cfg);
  auto y = augment_batch(batch, b, cfg);
  auto z = augment_batch(batch, c, cfg);
  EXPECT_TRUE(same_samples(x, y));
  EXPECT_FALSE(same_samples(x, z));
}

TEST(Augment, PreservesShapesAndLabelSet) {
  AugConfig cfg;
  cfg.mixup_prob = 1.0;
  cfg.min_frac = 0.25;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    auto batch = random_batch(seed);
    Rng rng(seed);
    auto out = augment_batch(batch, rng, cfg);
    ASSERT_EQ(out.size(), batch.size());
    for (const auto& s : out) {
      EXPECT_EQ(s.height(), 16);
      EXPECT_EQ(s.width(), 16);
      EXPECT_TRUE(s.labels.consistent());
      EXPECT_EQ(s.image.rgb.size(), 16u * 16u * 3u);
      for (int32_t l : s.labels.data) EXPECT_TRUE((l >= 0 && l < 5) || l == 255);
    }
  }
}

TEST(AugConfig, Validation) {
  AugConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.n_patches = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = AugConfig{};
  cfg.min_frac = 0.6;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = AugConfig{};
  cfg.flip_prob = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = AugConfig{};
  cfg.contrast = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

}  // namespace
}  // namespace depthseg
