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
#include <string>
#include <vector>

#include "depthseg/depth_space.hpp"
#include "depthseg/grid.hpp"

namespace depthseg {

// Decoded PNG: samples are row-major, channel-interleaved.
struct PngData {
  int64_t height = 0;
  int64_t width = 0;
  int channels = 0;   // 1 (gray) or 3 (rgb)
  int bit_depth = 0;  // 8 or 16
  std::vector<uint16_t> samples;
};

PngData read_png(const std::string& path);
void write_png(const std::string& path, const PngData& png);

void write_rgb_png(const std::string& path, const Image& image);
Image read_rgb_png(const std::string& path);

void write_label_png(const std::string& path, const Grid<int32_t>& labels);
Grid<int32_t> read_label_png(const std::string& path);

// 16-bit millimeters, 0 = invalid. Depths beyond 65.535 m cannot be stored.
void write_depth_png(const std::string& path, const DepthMap& depth);
DepthMap read_depth_png(const std::string& path);

// Headerless little-endian float32 array, row-major; size must equal h * w.
void write_f32_grid(const std::string& path, const Grid<float>& grid);
Grid<float> read_f32_grid(const std::string& path, int64_t height, int64_t width);

// Picks the decoder by extension: .png (millimeters) or .f32 (meters,
// non-finite or <= 0 = invalid).
DepthMap read_depth_file(const std::string& path, int64_t height, int64_t width);

}  // namespace depthseg
