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

#include "depthseg/grid.hpp"

namespace depthseg {

struct DepthRange {
  double d_min = 0.1;
  double d_max = 80.0;

  // Throws ConfigError unless 0 < d_min < d_max (both finite).
  void validate() const;
  double log_span() const;
};

// Metric depth in meters. Invalid pixels carry value 0.
struct DepthMap {
  Grid<double> values;
  Mask valid;

  DepthMap() = default;
  DepthMap(int64_t h, int64_t w) : values(h, w, 0.0), valid(h, w, 0) {}
  int64_t height() const { return values.height; }
  int64_t width() const { return values.width; }
};

// Normalized logarithmic depth in [0, 1]. Invalid pixels carry value 0.
struct LogDepthMap {
  Grid<double> values;
  Mask valid;

  LogDepthMap() = default;
  LogDepthMap(int64_t h, int64_t w) : values(h, w, 0.0), valid(h, w, 0) {}
};

// Parameterization used by the depth head and the critic input.
enum class DepthSpace { Log, Linear };

// Tolerance accepted outside [0, 1] by from_log_depth before rejecting.
inline constexpr double kLogDepthTolerance = 1e-6;

// Scalar forms: log(d / d_min) / log(d_max / d_min) and its inverse.
double log_depth(double meters, const DepthRange& range);
double metric_depth(double log_value, const DepthRange& range);

// Clamps valid pixels into [d_min, d_max] and maps them to [0, 1].
// clamped_count, when given, receives the number of pixels that were clamped.
LogDepthMap to_log_depth(const DepthMap& depth, const DepthRange& range,
                         int64_t* clamped_count = nullptr);

DepthMap from_log_depth(const LogDepthMap& log_depth, const DepthRange& range);

// depth = focal_px * baseline / disparity; disparity <= 0 or non-finite
// yields an invalid pixel.
DepthMap disparity_to_depth(const Grid<float>& disparity, double focal_px, double baseline_m);

// True where the stored mask is set and the value is finite and positive.
Mask validity_mask(const DepthMap& depth);

// Clamps valid values into [d_min, d_max] in place; returns clamp count.
int64_t clamp_to_range(DepthMap& depth, const DepthRange& range);

}  // namespace depthseg
