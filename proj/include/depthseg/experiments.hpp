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
#include <functional>
#include <string>
#include <vector>

#include "depthseg/training.hpp"

namespace depthseg {

struct AblationRow {
  std::string name;
  std::string label;
  EvalReport report;
  std::string digest;  // generator parameter digest after training
  int64_t params = 0;  // trainable generator parameters
  std::string reused_from;  // set when the row's config equals an earlier row's
};

// Trains every ablation variant of base with shared seeds and evaluates it on
// the validation split. Each run gets its own directory under out_dir.
std::vector<AblationRow> run_ablation(const RunConfig& base, const Dataset& data, const std::string& out_dir,
                                      const std::vector<std::string>& names = ablation_names(),
                                      const std::function<void(const std::string&, const LogEntry&)>& on_step = {});

// AbsRel and mIoU per row, one line per variant.
std::string ablation_table(const std::vector<AblationRow>& rows);
void write_ablation(const std::string& out_dir, const std::vector<AblationRow>& rows);

struct ExportOptions {
  std::string split = "val";
  int64_t limit = 0;  // 0 = every sample
  int64_t batch_size = 16;
};

// Writes <id>_depth.png (16-bit mm), <id>_labels.png and <id>_composite.png
// (input | gt depth | pred depth | gt labels | pred labels) for each sample.
// Returns the number of samples written.
int64_t export_predictions(MultiTaskNet& net, const CheckpointInfo& info, const Dataset& data,
                           const std::string& out_dir, const ExportOptions& options = {});

// Side-by-side panel strip; missing predictions render as gray panels.
Image make_composite(const Sample& sample, const PredictedSample& pred, const DatasetManifest& manifest);
Image colorize_depth(const DepthMap& depth, const DepthRange& range);
Image colorize_labels(const Grid<int32_t>& labels, int ignore_id);

// Line plot of the per-step total (black), depth (blue) and segmentation (red)
// losses on a shared linear axis with light grid lines.
Image plot_loss_curves(const std::vector<LogEntry>& log, int64_t height = 240, int64_t width = 480);

}  // namespace depthseg
