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
#include "depthseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "depthseg/errors.hpp"

namespace depthseg {

DepthMetrics depth_metrics(const DepthMap& pred, const DepthMap& gt, const DepthRange& range) {
  range.validate();
  if (!pred.values.same_shape(gt.values) || !gt.values.same_shape(gt.valid)) {
    throw DataError("depth_metrics: prediction and ground truth differ in shape");
  }
  const double t1 = 1.25, t2 = 1.25 * 1.25, t3 = 1.25 * 1.25 * 1.25;
  double abs_rel = 0, sq_rel = 0, sq = 0, sq_log = 0;
  int64_t d1 = 0, d2 = 0, d3 = 0, n = 0;
  for (int64_t i = 0; i < gt.values.size(); ++i) {
    const double g = gt.values.data[i];
    if (!gt.valid.data[i] || !std::isfinite(g) || g < range.d_min || g > range.d_max) continue;
    double p = pred.values.data[i];
    if (!std::isfinite(p)) throw DataError("depth_metrics: non-finite prediction");
    p = std::clamp(p, range.d_min, range.d_max);
    const double diff = p - g;
    abs_rel += std::abs(diff) / g;
    sq_rel += diff * diff / g;
    sq += diff * diff;
    const double dl = std::log(p) - std::log(g);
    sq_log += dl * dl;
    const double ratio = std::max(p / g, g / p);
    d1 += ratio < t1;
    d2 += ratio < t2;
    d3 += ratio < t3;
    ++n;
  }
  if (n == 0) throw DataError("depth_metrics: no ground-truth pixel inside the evaluation range");
  const double inv = 1.0 / static_cast<double>(n);
  DepthMetrics m;
  m.abs_rel = abs_rel * inv;
  m.sq_rel = sq_rel * inv;
  m.rmse = std::sqrt(sq * inv);
  m.rmse_log = std::sqrt(sq_log * inv);
  m.delta1 = static_cast<double>(d1) * inv;
  m.delta2 = static_cast<double>(d2) * inv;
  m.delta3 = static_cast<double>(d3) * inv;
  return m;
}

DepthMetrics mean_metrics(const std::vector<DepthMetrics>& per_image) {
  DepthMetrics m;
  if (per_image.empty()) return m;
  for (const auto& x : per_image) {
    m.abs_rel += x.abs_rel;
    m.sq_rel += x.sq_rel;
    m.rmse += x.rmse;
    m.rmse_log += x.rmse_log;
    m.delta1 += x.delta1;
    m.delta2 += x.delta2;
    m.delta3 += x.delta3;
  }
  const double inv = 1.0 / static_cast<double>(per_image.size());
  m.abs_rel *= inv;
  m.sq_rel *= inv;
  m.rmse *= inv;
  m.rmse_log *= inv;
  m.delta1 *= inv;
  m.delta2 *= inv;
  m.delta3 *= inv;
  return m;
}

SegAccumulator::SegAccumulator(int num_classes, int ignore_id)
    : k_(num_classes), ignore_id_(ignore_id), counts_(static_cast<size_t>(num_classes) * num_classes, 0) {
  if (num_classes < 1) throw ConfigError("SegAccumulator: need at least one class");
  if (ignore_id >= 0 && ignore_id < num_classes) throw ConfigError("SegAccumulator: ignore_id collides with a class id");
}

void SegAccumulator::update(const Grid<int32_t>& pred, const Grid<int32_t>& gt) {
  if (!pred.same_shape(gt)) throw DataError("update_confusion: prediction and label maps differ in shape");
  update(pred.data.data(), gt.data.data(), gt.size());
}

void SegAccumulator::update(const int32_t* pred, const int32_t* gt, int64_t count) {
  // Validate everything before touching the counts.
  for (int64_t i = 0; i < count; ++i) {
    if (gt[i] == ignore_id_) continue;
    if (gt[i] < 0 || gt[i] >= k_) throw DataError("update_confusion: label " + std::to_string(gt[i]) + " out of range");
    if (pred[i] < 0 || pred[i] >= k_) {
      throw DataError("update_confusion: predicted label " + std::to_string(pred[i]) + " out of range");
    }
  }
  for (int64_t i = 0; i < count; ++i) {
    if (gt[i] == ignore_id_) continue;
    ++counts_[static_cast<size_t>(gt[i] * k_ + pred[i])];
  }
}

void SegAccumulator::merge(const SegAccumulator& other) {
  if (other.k_ != k_ || other.ignore_id_ != ignore_id_) throw DataError("SegAccumulator::merge: incompatible accumulators");
  for (size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

uint64_t SegAccumulator::total() const {
  uint64_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

SegScores miou(const SegAccumulator& acc) {
  const int k = acc.num_classes();
  const uint64_t total = acc.total();
  if (total == 0) throw DataError("miou: no scored pixels");
  SegScores s;
  s.per_class_iou.assign(static_cast<size_t>(k), std::numeric_limits<double>::quiet_NaN());
  uint64_t trace = 0;
  double sum = 0.0;
  int included = 0;
  for (int c = 0; c < k; ++c) {
    uint64_t row = 0, col = 0;
    for (int j = 0; j < k; ++j) {
      row += acc.at(c, j);
      col += acc.at(j, c);
    }
    const uint64_t tp = acc.at(c, c);
    trace += tp;
    const uint64_t denom = row + col - tp;
    if (denom == 0) continue;
    const double iou = static_cast<double>(tp) / static_cast<double>(denom);
    s.per_class_iou[static_cast<size_t>(c)] = iou;
    sum += iou;
    ++included;
  }
  s.miou = sum / included;
  s.pixel_acc = static_cast<double>(trace) / static_cast<double>(total);
  return s;
}

}  // namespace depthseg
