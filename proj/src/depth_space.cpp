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
#include "depthseg/depth_space.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "depthseg/errors.hpp"

namespace depthseg {

void DepthRange::validate() const {
  if (!std::isfinite(d_min) || !std::isfinite(d_max) || d_min <= 0.0 || d_max <= d_min) {
    throw ConfigError("invalid depth range: need 0 < d_min < d_max, got d_min=" +
                      std::to_string(d_min) + " d_max=" + std::to_string(d_max));
  }
}

double DepthRange::log_span() const { return std::log(d_max / d_min); }

double log_depth(double meters, const DepthRange& range) {
  return std::log(meters / range.d_min) / range.log_span();
}

double metric_depth(double log_value, const DepthRange& range) {
  return range.d_min * std::exp(log_value * range.log_span());
}

namespace {

void check_shape(const Grid<double>& values, const Mask& valid, const char* what) {
  if (!values.same_shape(valid) || !values.consistent() || !valid.consistent()) {
    throw DataError(std::string(what) + ": value grid and validity mask differ in shape");
  }
}

}  // namespace

LogDepthMap to_log_depth(const DepthMap& depth, const DepthRange& range, int64_t* clamped_count) {
  range.validate();
  check_shape(depth.values, depth.valid, "to_log_depth");
  LogDepthMap out(depth.values.height, depth.values.width);
  out.valid = depth.valid;
  int64_t clamped = 0;
  for (int64_t i = 0; i < depth.values.size(); ++i) {
    if (!depth.valid.data[i]) continue;
    double d = depth.values.data[i];
    if (!std::isfinite(d)) throw DataError("to_log_depth: non-finite depth on a valid pixel");
    if (d < range.d_min || d > range.d_max) {
      d = std::clamp(d, range.d_min, range.d_max);
      ++clamped;
    }
    // Exact anchors at the range ends.
    if (d == range.d_min) {
      out.values.data[i] = 0.0;
    } else if (d == range.d_max) {
      out.values.data[i] = 1.0;
    } else {
      out.values.data[i] = log_depth(d, range);
    }
  }
  if (clamped_count) *clamped_count = clamped;
  return out;
}

DepthMap from_log_depth(const LogDepthMap& log_map, const DepthRange& range) {
  range.validate();
  check_shape(log_map.values, log_map.valid, "from_log_depth");
  DepthMap out(log_map.values.height, log_map.values.width);
  out.valid = log_map.valid;
  for (int64_t i = 0; i < log_map.values.size(); ++i) {
    if (!log_map.valid.data[i]) continue;
    double l = log_map.values.data[i];
    if (!std::isfinite(l) || l < -kLogDepthTolerance || l > 1.0 + kLogDepthTolerance) {
      throw DataError("from_log_depth: value " + std::to_string(l) + " outside [0, 1]");
    }
    l = std::clamp(l, 0.0, 1.0);
    if (l == 0.0) {
      out.values.data[i] = range.d_min;
    } else if (l == 1.0) {
      out.values.data[i] = range.d_max;
    } else {
      out.values.data[i] = metric_depth(l, range);
    }
  }
  return out;
}

DepthMap disparity_to_depth(const Grid<float>& disparity, double focal_px, double baseline_m) {
  if (!(focal_px > 0.0) || !(baseline_m > 0.0) || !std::isfinite(focal_px) ||
      !std::isfinite(baseline_m)) {
    throw ConfigError("disparity_to_depth: focal length and baseline must be positive");
  }
  if (!disparity.consistent()) throw DataError("disparity_to_depth: malformed grid");
  DepthMap out(disparity.height, disparity.width);
  const double fb = focal_px * baseline_m;
  for (int64_t i = 0; i < disparity.size(); ++i) {
    const double disp = disparity.data[i];
    if (!std::isfinite(disp) || disp <= 0.0) continue;
    const double d = fb / disp;
    if (!std::isfinite(d)) continue;
    out.values.data[i] = d;
    out.valid.data[i] = 1;
  }
  return out;
}

Mask validity_mask(const DepthMap& depth) {
  check_shape(depth.values, depth.valid, "validity_mask");
  Mask m(depth.values.height, depth.values.width, 0);
  for (int64_t i = 0; i < m.size(); ++i) {
    const double d = depth.values.data[i];
    m.data[i] = (depth.valid.data[i] && std::isfinite(d) && d > 0.0) ? 1 : 0;
  }
  return m;
}

int64_t clamp_to_range(DepthMap& depth, const DepthRange& range) {
  check_shape(depth.values, depth.valid, "clamp_to_range");
  int64_t n = 0;
  for (int64_t i = 0; i < depth.values.size(); ++i) {
    if (!depth.valid.data[i]) continue;
    double& d = depth.values.data[i];
    if (d < range.d_min || d > range.d_max) {
      d = std::clamp(d, range.d_min, range.d_max);
      ++n;
    }
  }
  return n;
}

}  // namespace depthseg
