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
#pragma once

#include <cstdint>
#include <vector>

#include "depthseg/sample.hpp"

namespace depthseg {

enum class MixupMode { CrossImage, SameImage };

struct AugConfig {
  int n_patches = 4;
  double min_frac = 1.0 / 8.0;   // of image height
  double max_frac = 1.0 / 2.0;
  // Photometric ranges: additive brightness in [-b, b]; contrast, saturation
  // and value factors in [1 - x, 1 + x]; gamma exponent in [1 - g, 1 + g];
  // hue shift in [-h, h] turns.
  double brightness = 0.05;
  double contrast = 0.05;
  double gamma = 0.05;
  double hue = 0.02;
  double saturation = 0.05;
  double value = 0.05;
  double flip_prob = 0.5;
  double mixup_prob = 0.5;
  MixupMode mixup_mode = MixupMode::CrossImage;

  void validate() const;
};

struct PhotometricParams {
  double brightness = 0.0;
  double contrast = 1.0;
  double gamma = 1.0;
  double hue_shift = 0.0;
  double saturation = 1.0;
  double value = 1.0;
};

PhotometricParams draw_photometric(Rng& rng, const AugConfig& cfg);
// Brightness, contrast about the image mean, gamma, then an HSV adjustment;
// output clamped to [0, 1]. Neutral parameters leave the image untouched.
void apply_photometric(Image& image, const PhotometricParams& p);
Image photometric(Image image, Rng& rng, const AugConfig& cfg);

// Mirrors image, depth, validity and labels about the vertical axis.
void mirror(Sample& sample);
Sample hflip(Sample sample, Rng& rng, double p);

struct Patch {
  int image = 0;
  int64_t row = 0;
  int64_t col = 0;
  int64_t side = 0;
};

// Slot j is overwritten with the original content of patches[source[j]].
struct PatchPlan {
  std::vector<Patch> patches;
  std::vector<size_t> source;
};

// Side lengths allowed for patches: multiples of height/8 within
// [min_frac * height, max_frac * height].
std::vector<int64_t> patch_sizes(int64_t height, int64_t width, const AugConfig& cfg);

// N patches per image (side and position uniform), then one uniform
// permutation inside each group of equal side (and, in same-image mode, equal image).
PatchPlan plan_patch_mixup(const std::vector<Sample>& batch, Rng& rng, const AugConfig& cfg);
// Pastes in plan order; later slots overwrite earlier ones.
void apply_patch_plan(std::vector<Sample>& batch, const PatchPlan& plan);
std::vector<Sample> patch_mixup(std::vector<Sample> batch, Rng& rng, const AugConfig& cfg);

// photometric -> flip per sample, then patch_mixup with probability mixup_prob.
std::vector<Sample> augment_batch(std::vector<Sample> batch, Rng& rng, const AugConfig& cfg);

}  // namespace depthseg
