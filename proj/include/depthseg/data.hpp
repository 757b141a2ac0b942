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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "depthseg/config.hpp"
#include "depthseg/depth_space.hpp"
#include "depthseg/sample.hpp"

namespace depthseg {

inline constexpr int kDefaultIgnoreId = 255;
inline constexpr const char* kManifestFile = "manifest.cfg";

// Dataset description stored as root/manifest.cfg. Layout per split:
// root/<split>/image/<id>.png (RGB8), root/<split>/depth/<id>.png (16-bit mm)
// or <id>.f32 (float meters), root/<split>/label/<id>.png (8-bit class ids).
struct DatasetManifest {
  std::string root;
  int num_classes = 5;
  int ignore_id = kDefaultIgnoreId;
  DepthRange range{0.1, 60.0};
  std::vector<std::string> class_names;
  std::array<double, 3> mean{0.5, 0.5, 0.5};
  std::array<double, 3> std{0.5, 0.5, 0.5};
  int64_t height = 64;
  int64_t width = 64;
  std::vector<std::string> splits;

  void validate() const;
  KeyValues to_key_values() const;
  static DatasetManifest from_key_values(const KeyValues& kv, const std::string& root);
  static DatasetManifest load(const std::string& root);
  void save(const std::string& root) const;
};

// Samples of one split in lexicographic id order. A split directory without
// samples yields an empty vector.
std::vector<Sample> load_dataset(const std::string& root, const std::string& split, const DatasetManifest& manifest);

// Writes one sample under root/<split>/{image,depth,label}/<id>.png.
void save_sample(const std::string& root, const std::string& split, const Sample& sample);

struct SyntheticSpec {
  int64_t height = 64;
  int64_t width = 64;
  int num_classes = 5;
  DepthRange range{0.1, 60.0};
  double noise = 0.01;

  void validate() const;
};

// A fronto-parallel rectangle or ellipse at constant depth.
struct SceneShape {
  bool ellipse = false;
  int class_id = 1;
  double center_row = 0, center_col = 0;
  double half_height = 1, half_width = 1;
  double depth = 1;

  // Pixel (r, c) is covered when its center lies inside the shape.
  bool covers(int64_t r, int64_t c) const;
};

struct Scene {
  Sample sample;
  std::vector<SceneShape> shapes;
};

// Per-class base color used by the renderer (class 0 = background).
std::array<float, 3> class_color(int class_id);

// A background plane at d_max plus 3-8 shapes painted far to near; the color of
// a pixel is its class color shaded by depth plus Gaussian noise.
Scene render_scene(uint64_t seed, const SyntheticSpec& spec, const std::string& id);

// Renders count scenes into root/<split>. Scene i uses mix_seed(seed, split, i).
void gen_synthetic(const std::string& root, const std::string& split, uint64_t seed, int64_t count,
                   const SyntheticSpec& spec);

DatasetManifest synthetic_manifest(const SyntheticSpec& spec, const std::vector<std::string>& splits);

// Central crop to height x width (no-op when the sample already has that size).
Sample center_crop(const Sample& sample, int64_t height, int64_t width);

struct TensorSample {
  torch::Tensor image;      // 3 x H x W, normalized by manifest mean/std
  torch::Tensor log_depth;  // 1 x H x W, log-normalized ground truth, 0 where invalid
  torch::Tensor labels;     // H x W, int64
  torch::Tensor valid;      // 1 x H x W, bool
};

TensorSample sample_to_tensors(const Sample& sample, const DatasetManifest& manifest);
Image denormalize(const torch::Tensor& image, const DatasetManifest& manifest);

struct TensorBatch {
  torch::Tensor images;  // B x 3 x H x W normalized
  torch::Tensor depth;   // B x 1 x H x W meters, clamped into range on valid pixels, 0 elsewhere
  torch::Tensor valid;   // B x 1 x H x W bool
  torch::Tensor labels;  // B x H x W int64
};

TensorBatch make_batch(const std::vector<Sample>& samples, const DatasetManifest& manifest,
                       torch::ScalarType dtype = torch::kFloat);

}  // namespace depthseg
