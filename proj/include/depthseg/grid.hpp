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
#include <stdexcept>
#include <utility>
#include <vector>

namespace depthseg {

// Row-major 2-D array.
template <typename T>
struct Grid {
  int64_t height = 0;
  int64_t width = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int64_t h, int64_t w, T fill = T{})
      : height(h), width(w), data(static_cast<size_t>(h * w), fill) {
    if (h < 0 || w < 0) throw std::invalid_argument("Grid: negative dimension");
  }

  T& operator()(int64_t r, int64_t c) { return data[static_cast<size_t>(r * width + c)]; }
  const T& operator()(int64_t r, int64_t c) const {
    return data[static_cast<size_t>(r * width + c)];
  }

  int64_t size() const { return height * width; }
  bool empty() const { return data.empty(); }
  bool consistent() const { return static_cast<int64_t>(data.size()) == height * width; }

  template <typename U>
  bool same_shape(const Grid<U>& o) const {
    return height == o.height && width == o.width;
  }

  bool operator==(const Grid&) const = default;
};

using Mask = Grid<uint8_t>;

// Interleaved H x W x 3 image with channel values in [0, 1].
struct Image {
  int64_t height = 0;
  int64_t width = 0;
  std::vector<float> rgb;

  Image() = default;
  Image(int64_t h, int64_t w, float fill = 0.f)
      : height(h), width(w), rgb(static_cast<size_t>(h * w * 3), fill) {}

  float& at(int64_t r, int64_t c, int ch) { return rgb[static_cast<size_t>((r * width + c) * 3 + ch)]; }
  float at(int64_t r, int64_t c, int ch) const {
    return rgb[static_cast<size_t>((r * width + c) * 3 + ch)];
  }

  bool operator==(const Image&) const = default;
};

}  // namespace depthseg
