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
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "depthseg/errors.hpp"
#include "depthseg/training.hpp"

namespace depthseg {

std::vector<PredictedSample> predict_samples(MultiTaskNet& net, const std::vector<Sample>& samples,
                                             const DatasetManifest& manifest, DepthSpace space, int64_t batch_size) {
  if (batch_size < 1) throw ConfigError("prediction batch size must be >= 1");
  torch::NoGradGuard no_grad;
  net->eval();
  std::vector<PredictedSample> out;
  out.reserve(samples.size());
  for (size_t start = 0; start < samples.size(); start += static_cast<size_t>(batch_size)) {
    const size_t stop = std::min(samples.size(), start + static_cast<size_t>(batch_size));
    const std::vector<Sample> chunk(samples.begin() + static_cast<std::ptrdiff_t>(start),
                                    samples.begin() + static_cast<std::ptrdiff_t>(stop));
    const TensorBatch batch = make_batch(chunk, manifest, torch::kFloat);
    const Predictions pred = net->forward(batch.images);
    torch::Tensor enc, labels;
    if (pred.log_depth.defined()) enc = pred.log_depth.to(torch::kDouble).contiguous();
    if (pred.seg_logits.defined()) labels = pred.seg_logits.argmax(1).to(torch::kInt).contiguous();
    for (size_t i = 0; i < chunk.size(); ++i) {
      const int64_t h = chunk[i].height(), w = chunk[i].width();
      PredictedSample p;
      if (enc.defined()) {
        auto e = enc[static_cast<int64_t>(i)][0];
        auto a = e.accessor<double, 2>();
        if (space == DepthSpace::Log) {
          LogDepthMap log_map(h, w);
          for (int64_t r = 0; r < h; ++r) {
            for (int64_t c = 0; c < w; ++c) {
              log_map.values(r, c) = a[r][c];
              log_map.valid(r, c) = 1;
            }
          }
          p.depth = from_log_depth(log_map, manifest.range);
        } else {
          DepthMap map(h, w);
          for (int64_t r = 0; r < h; ++r) {
            for (int64_t c = 0; c < w; ++c) {
              map.values(r, c) = a[r][c] * manifest.range.d_max;
              map.valid(r, c) = 1;
            }
          }
          p.depth = map;
        }
      }
      if (labels.defined()) {
        auto li = labels[static_cast<int64_t>(i)];
        auto a = li.accessor<int32_t, 2>();
        Grid<int32_t> grid(h, w, 0);
        for (int64_t r = 0; r < h; ++r) {
          for (int64_t c = 0; c < w; ++c) grid(r, c) = a[r][c];
        }
        p.labels = std::move(grid);
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

namespace {

bool has_scorable_depth(const DepthMap& gt, const DepthRange& range) {
  for (int64_t i = 0; i < gt.values.size(); ++i) {
    const double d = gt.values.data[static_cast<size_t>(i)];
    if (gt.valid.data[static_cast<size_t>(i)] && std::isfinite(d) && d >= range.d_min && d <= range.d_max) return true;
  }
  return false;
}

}  // namespace

EvalReport evaluate_predictions(const std::vector<PredictedSample>& predictions, const std::vector<Sample>& samples,
                                const DatasetManifest& manifest) {
  if (samples.empty()) throw DataError("evaluation split is empty");
  if (predictions.size() != samples.size()) throw DataError("evaluation: prediction count differs from sample count");
  EvalReport report;
  report.images = static_cast<int64_t>(samples.size());
  std::vector<DepthMetrics> per_image;
  SegAccumulator acc(manifest.num_classes, manifest.ignore_id);
  for (size_t i = 0; i < samples.size(); ++i) {
    const auto& p = predictions[i];
    if (p.depth) {
      report.has_depth = true;
      if (has_scorable_depth(samples[i].depth, manifest.range)) {
        per_image.push_back(depth_metrics(*p.depth, samples[i].depth, manifest.range));
      }
    }
    if (p.labels) {
      report.has_seg = true;
      acc.update(*p.labels, samples[i].labels);
    }
  }
  if (report.has_depth) {
    if (per_image.empty()) throw DataError("evaluation: no image has valid ground-truth depth");
    report.depth = mean_metrics(per_image);
  }
  if (report.has_seg) report.seg = miou(acc);
  return report;
}

EvalReport evaluate(MultiTaskNet& net, const std::vector<Sample>& samples, const DatasetManifest& manifest,
                    DepthSpace space, int64_t batch_size) {
  if (samples.empty()) throw DataError("evaluation split is empty");
  return evaluate_predictions(predict_samples(net, samples, manifest, space, batch_size), samples, manifest);
}

KeyValues eval_report_records(const EvalReport& r) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto d = [&](double v) { return format_double(r.has_depth ? v : nan); };
  auto s = [&](double v) { return format_double(r.has_seg ? v : nan); };
  return {{"abs_rel", d(r.depth.abs_rel)}, {"sq_rel", d(r.depth.sq_rel)},     {"rmse", d(r.depth.rmse)},
          {"rmse_log", d(r.depth.rmse_log)}, {"delta1", d(r.depth.delta1)}, {"delta2", d(r.depth.delta2)},
          {"delta3", d(r.depth.delta3)},   {"miou", s(r.seg.miou)},         {"pixel_acc", s(r.seg.pixel_acc)}};
}

std::string eval_report_table(const EvalReport& r) {
  auto cell = [](bool present, double v, int precision) {
    char buf[32];
    if (!present) return std::string("-");
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return std::string(buf);
  };
  auto row = [](const std::vector<std::string>& cells) {
    std::string line;
    for (const auto& c : cells) line += pad_right(c, 11);
    line.erase(line.find_last_not_of(' ') + 1);
    return line + "\n";
  };
  const bool d = r.has_depth, s = r.has_seg;
  const auto& m = r.depth;
  std::string out = "Depth (" + std::to_string(r.images) + " images)\n";
  out += row({"AbsRel ↓", "SqRel ↓", "RMSE ↓", "RMSElog ↓", "δ<1.25 ↑", "δ<1.25² ↑", "δ<1.25³ ↑"});
  out += row({cell(d, m.abs_rel, 3), cell(d, m.sq_rel, 3), cell(d, m.rmse, 3), cell(d, m.rmse_log, 3),
              cell(d, m.delta1, 3), cell(d, m.delta2, 3), cell(d, m.delta3, 3)});
  out += "\nJoint\n";
  out += row({"RMSE ↓", "mIoU ↑", "PixAcc ↑"});
  out += row({cell(d, m.rmse, 3), cell(s, 100.0 * r.seg.miou, 2), cell(s, 100.0 * r.seg.pixel_acc, 2)});
  return out;
}

void write_eval_report(const std::string& path, const EvalReport& report) {
  write_key_values(path, eval_report_records(report));
  std::filesystem::path table(path);
  table.replace_extension(".table");
  std::ofstream out(table);
  if (!out) throw DataError("cannot write " + table.string());
  out << eval_report_table(report);
}

}  // namespace depthseg
