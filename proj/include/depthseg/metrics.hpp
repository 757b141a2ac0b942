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

#include "depthseg/depth_space.hpp"
#include "depthseg/grid.hpp"

namespace depthseg {

struct DepthMetrics {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;      // meters
  double rmse_log = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
};

// Evaluated over gt-valid pixels with gt inside [d_min, d_max]; predictions are
// clamped to the range first. delta_k counts max(p/g, g/p) < 1.25^k strictly.
// Throws DataError when no pixel qualifies.
DepthMetrics depth_metrics(const DepthMap& pred, const DepthMap& gt, const DepthRange& range);

// Element-wise mean of per-image metrics.
DepthMetrics mean_metrics(const std::vector<DepthMetrics>& per_image);

// K x K confusion counts, rows = ground truth, columns = prediction.
class SegAccumulator {
 public:
  SegAccumulator(int num_classes, int ignore_id = 255);

  // Adds one count per pixel whose ground truth is not ignore_id.
  void update(const Grid<int32_t>& pred, const Grid<int32_t>& gt);
  void update(const int32_t* pred, const int32_t* gt, int64_t count);
  void merge(const SegAccumulator& other);

  int num_classes() const { return k_; }
  int ignore_id() const { return ignore_id_; }
  uint64_t at(int gt, int pred) const { return counts_[static_cast<size_t>(gt * k_ + pred)]; }
  uint64_t total() const;
  const std::vector<uint64_t>& counts() const { return counts_; }

 private:
  int k_;
  int ignore_id_;
  std::vector<uint64_t> counts_;
};

struct SegScores {
  double miou = 0.0;
  std::vector<double> per_class_iou;  // NaN for classes absent from both gt and prediction
  double pixel_acc = 0.0;
};

// IoU_k = c_kk / (row_k + col_k - c_kk); classes with a zero denominator are
// left out of the mean. Throws DataError if nothing was scored.
SegScores miou(const SegAccumulator& acc);

}  // namespace depthseg
