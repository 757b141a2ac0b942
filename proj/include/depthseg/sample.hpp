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
#include <random>
#include <string>
#include <string_view>

#include "depthseg/depth_space.hpp"
#include "depthseg/grid.hpp"

namespace depthseg {

using Rng = std::mt19937_64;

// One training example. All maps share height x width.
struct Sample {
  std::string id;
  Image image;              // RGB in [0, 1]
  DepthMap depth;           // meters, 0 = invalid
  Grid<int32_t> labels;     // class ids or the ignore id

  int64_t height() const { return image.height; }
  int64_t width() const { return image.width; }
};

// Mixes several integers into one well-spread 64-bit seed.
uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c = 0, uint64_t d = 0);

// FNV-1a; stable across platforms, unlike std::hash.
uint64_t hash_string(std::string_view s);

}  // namespace depthseg
