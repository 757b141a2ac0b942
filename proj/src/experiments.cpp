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
#include "depthseg/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "depthseg/errors.hpp"
#include "depthseg/io.hpp"

namespace fs = std::filesystem;

namespace depthseg {

std::vector<AblationRow> run_ablation(const RunConfig& base, const Dataset& data, const std::string& out_dir,
                                      const std::vector<std::string>& names,
                                      const std::function<void(const std::string&, const LogEntry&)>& on_step) {
  if (data.val.empty()) throw DataError("ablation needs a non-empty val split");
  std::vector<AblationRow> rows;
  std::vector<KeyValues> configs;
  for (const auto& name : names) {
    RunConfig cfg = base;
    apply_ablation(cfg, name);
    cfg.validate();
    AblationRow row;
    row.name = name;
    row.label = ablation_label(name);
    const KeyValues kv = cfg.to_key_values();
    auto same = std::find(configs.begin(), configs.end(), kv);
    if (same != configs.end()) {
      const auto& earlier = rows[static_cast<size_t>(same - configs.begin())];
      row.report = earlier.report;
      row.digest = earlier.digest;
      row.params = earlier.params;
      row.reused_from = earlier.reused_from.empty() ? earlier.name : earlier.reused_from;
    } else {
      FitOptions options;
      if (!out_dir.empty()) options.out_dir = (fs::path(out_dir) / name).string();
      if (on_step) options.on_step = [&](const LogEntry& e) { on_step(name, e); };
      const TrainReport report = fit(cfg, data, options);
      if (report.evals.empty()) throw DataError("ablation run '" + name + "' produced no evaluation");
      row.report = report.evals.back().second;
      row.digest = report.digest;
      row.params = report.params;
    }
    configs.push_back(kv);
    rows.push_back(row);
  }
  return rows;
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
  auto line = [](const std::string& a, const std::string& b, const std::string& c, const std::string& d) {
    std::string out = pad_right(a, 17) + pad_right(b, 11) + pad_right(c, 11) + d;
    return out + "\n";
  };
  std::string out = line("Variant", "AbsRel ↓", "mIoU ↑", "Params");
  for (const auto& row : rows) {
    char abs_rel[32] = "-", miou_cell[32] = "-";
    if (row.report.has_depth) std::snprintf(abs_rel, sizeof(abs_rel), "%.3f", row.report.depth.abs_rel);
    if (row.report.has_seg) std::snprintf(miou_cell, sizeof(miou_cell), "%.2f", 100.0 * row.report.seg.miou);
    out += line(row.label, abs_rel, miou_cell, std::to_string(row.params));
  }
  return out;
}

void write_ablation(const std::string& out_dir, const std::vector<AblationRow>& rows) {
  fs::create_directories(out_dir);
  std::ofstream table(fs::path(out_dir) / "ablation.table");
  table << ablation_table(rows);
  KeyValues kv;
  for (const auto& row : rows) {
    for (const auto& [k, v] : eval_report_records(row.report)) kv[row.name + "." + k] = v;
    kv[row.name + ".digest"] = row.digest;
    kv[row.name + ".params"] = std::to_string(row.params);
    if (!row.reused_from.empty()) kv[row.name + ".reused_from"] = row.reused_from;
  }
  write_key_values((fs::path(out_dir) / "ablation.records").string(), kv);
}

Image colorize_depth(const DepthMap& depth, const DepthRange& range) {
  Image img(depth.height(), depth.width(), 0.f);
  for (int64_t r = 0; r < depth.height(); ++r) {
    for (int64_t c = 0; c < depth.width(); ++c) {
      const double d = depth.values(r, c);
      if (!depth.valid(r, c) || !std::isfinite(d) || d <= 0.0) continue;
      // Near = warm and bright, far = cool and dark.
      const auto t = static_cast<float>(1.0 - log_depth(std::clamp(d, range.d_min, range.d_max), range));
      img.at(r, c, 0) = t;
      img.at(r, c, 1) = 0.25f + 0.5f * t * (1.f - t) * 2.f;
      img.at(r, c, 2) = 1.f - t;
    }
  }
  return img;
}

Image colorize_labels(const Grid<int32_t>& labels, int ignore_id) {
  Image img(labels.height, labels.width, 0.f);
  for (int64_t r = 0; r < labels.height; ++r) {
    for (int64_t c = 0; c < labels.width; ++c) {
      if (labels(r, c) == ignore_id || labels(r, c) < 0) continue;
      const auto color = class_color(labels(r, c));
      for (int ch = 0; ch < 3; ++ch) img.at(r, c, ch) = color[static_cast<size_t>(ch)];
    }
  }
  return img;
}

Image make_composite(const Sample& sample, const PredictedSample& pred, const DatasetManifest& manifest) {
  const int64_t h = sample.height(), w = sample.width();
  const Image gray(h, w, 0.5f);
  const Image panels[5] = {
      sample.image,
      colorize_depth(sample.depth, manifest.range),
      pred.depth ? colorize_depth(*pred.depth, manifest.range) : gray,
      colorize_labels(sample.labels, manifest.ignore_id),
      pred.labels ? colorize_labels(*pred.labels, manifest.ignore_id) : gray,
  };
  Image out(h, 5 * w);
  for (int p = 0; p < 5; ++p) {
    for (int64_t r = 0; r < h; ++r) {
      for (int64_t c = 0; c < w; ++c) {
        for (int ch = 0; ch < 3; ++ch) out.at(r, p * w + c, ch) = panels[p].at(r, c, ch);
      }
    }
  }
  return out;
}

int64_t export_predictions(MultiTaskNet& net, const CheckpointInfo& info, const Dataset& data,
                           const std::string& out_dir, const ExportOptions& options) {
  const std::vector<Sample>* samples = nullptr;
  if (options.split == "train") samples = &data.train;
  else if (options.split == "val") samples = &data.val;
  else throw ConfigError("export: unknown split '" + options.split + "'");
  if (samples->empty()) throw DataError("export: split '" + options.split + "' is empty");
  const size_t n = options.limit > 0 ? std::min(samples->size(), static_cast<size_t>(options.limit)) : samples->size();
  const std::vector<Sample> chosen(samples->begin(), samples->begin() + static_cast<std::ptrdiff_t>(n));
  const auto preds = predict_samples(net, chosen, data.manifest, info.config.train.depth_space, options.batch_size);
  fs::create_directories(out_dir);
  for (size_t i = 0; i < n; ++i) {
    const fs::path base = fs::path(out_dir) / chosen[i].id;
    if (preds[i].depth) {
      DepthMap clamped = *preds[i].depth;
      clamp_to_range(clamped, data.manifest.range);
      write_depth_png(base.string() + "_depth.png", clamped);
    }
    if (preds[i].labels) write_label_png(base.string() + "_labels.png", *preds[i].labels);
    write_rgb_png(base.string() + "_composite.png", make_composite(chosen[i], preds[i], data.manifest));
  }
  return static_cast<int64_t>(n);
}

namespace {

void draw_line(Image& img, int64_t r0, int64_t c0, int64_t r1, int64_t c1, const std::array<float, 3>& color) {
  const int64_t dr = std::abs(r1 - r0), dc = std::abs(c1 - c0);
  const int64_t sr = r0 < r1 ? 1 : -1, sc = c0 < c1 ? 1 : -1;
  int64_t err = dc - dr;
  while (true) {
    if (r0 >= 0 && r0 < img.height && c0 >= 0 && c0 < img.width) {
      for (int ch = 0; ch < 3; ++ch) img.at(r0, c0, ch) = color[static_cast<size_t>(ch)];
    }
    if (r0 == r1 && c0 == c1) break;
    const int64_t e2 = 2 * err;
    if (e2 > -dr) {
      err -= dr;
      c0 += sc;
    }
    if (e2 < dc) {
      err += dc;
      r0 += sr;
    }
  }
}

}  // namespace

Image plot_loss_curves(const std::vector<LogEntry>& log, int64_t height, int64_t width) {
  if (height < 32 || width < 32) throw ConfigError("plot: canvas too small");
  Image img(height, width, 1.f);
  const int64_t margin = 12;
  const int64_t top = margin, bottom = height - margin, left = margin, right = width - margin;
  const std::array<float, 3> grid_color{0.88f, 0.88f, 0.88f}, axis_color{0.3f, 0.3f, 0.3f};
  for (int i = 1; i < 4; ++i) {
    const int64_t r = top + (bottom - top) * i / 4;
    draw_line(img, r, left, r, right, grid_color);
  }
  draw_line(img, bottom, left, bottom, right, axis_color);
  draw_line(img, top, left, bottom, left, axis_color);
  if (log.empty()) return img;

  using Getter = double (*)(const LogEntry&);
  const std::pair<Getter, std::array<float, 3>> series[] = {
      {[](const LogEntry& e) { return e.loss.l_total; }, {0.f, 0.f, 0.f}},
      {[](const LogEntry& e) { return e.loss.l_depth; }, {0.1f, 0.3f, 0.9f}},
      {[](const LogEntry& e) { return e.loss.l_seg; }, {0.9f, 0.15f, 0.1f}},
  };
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const auto& e : log) {
    for (const auto& [get, color] : series) {
      const double v = get(e);
      if (!std::isfinite(v)) continue;
      lo = first ? v : std::min(lo, v);
      hi = first ? v : std::max(hi, v);
      first = false;
    }
  }
  if (hi - lo < 1e-12) hi = lo + 1.0;
  const auto n = static_cast<double>(log.size());
  auto col_of = [&](size_t i) {
    return left + static_cast<int64_t>(std::lround((right - left) * (n > 1 ? static_cast<double>(i) / (n - 1) : 0.0)));
  };
  auto row_of = [&](double v) { return bottom - static_cast<int64_t>(std::lround((bottom - top) * (v - lo) / (hi - lo))); };
  for (const auto& [get, color] : series) {
    for (size_t i = 1; i < log.size(); ++i) {
      const double a = get(log[i - 1]), b = get(log[i]);
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      draw_line(img, row_of(a), col_of(i - 1), row_of(b), col_of(i), color);
    }
  }
  return img;
}

}  // namespace depthseg
