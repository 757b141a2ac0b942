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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "depthseg/augment.hpp"
#include "depthseg/config.hpp"
#include "depthseg/data.hpp"
#include "depthseg/losses.hpp"
#include "depthseg/metrics.hpp"
#include "depthseg/model.hpp"

namespace depthseg {

enum class CriticMode { None, One, Two };

struct TrainConfig {
  double base_lr = 5e-4;
  double weight_decay = 5e-2;
  double poly_power = 0.9;
  int64_t total_steps = 2000;
  int64_t batch_size = 4;
  int64_t critic_steps = 5;  // critic updates per generator update
  double critic_lr = 1e-4;
  int64_t critic_channels = 16;
  LossWeights weights;
  uint64_t seed = 0;
  int64_t checkpoint_interval = 1000;  // 0 = final checkpoint only
  int64_t eval_interval = 500;         // 0 = initial and final evaluation only
  int64_t eval_batch_size = 16;
  CriticMode critic = CriticMode::One;
  DepthSpace depth_space = DepthSpace::Log;
  bool augment = true;
  bool deterministic = true;
  int64_t center_crop = 0;  // 0 = full frames

  void validate() const;
};

// Everything needed to reproduce a run. Dataset-dependent network fields
// (classes, image size) are filled in from the dataset manifest.
struct RunConfig {
  NetConfig net;
  TrainConfig train;
  AugConfig aug;

  void validate() const;
  KeyValues to_key_values() const;
  // Unknown keys are errors. When require_loss_keys is set, every loss.* key
  // must be present explicitly.
  static RunConfig from_key_values(const KeyValues& kv, bool require_loss_keys = true);
  // Applies "key = value" overrides on top of this config.
  void apply(const KeyValues& overrides);
};

// Rows of the ablation table, in output order.
const std::vector<std::string>& ablation_names();
// Human-readable row label for an ablation name.
std::string ablation_label(const std::string& name);
void apply_ablation(RunConfig& cfg, const std::string& name);

// base * (1 - step / total)^power, 0 once step >= total.
double poly_lr(double base, int64_t step, int64_t total, double power);

struct Dataset {
  DatasetManifest manifest;
  std::vector<Sample> train;
  std::vector<Sample> val;
};

// Loads the train split and, when present, the val split; applies an optional center crop.
Dataset load_training_data(const std::string& root, int64_t center_crop = 0);

// Fills dataset-dependent network fields.
NetConfig resolve_net_config(const RunConfig& cfg, const DatasetManifest& manifest);

// Depth encodings shared by the head, the critic input and the loss.
torch::Tensor encode_depth(const torch::Tensor& meters, const DepthRange& range, DepthSpace space);
torch::Tensor log_meters_from_encoded(const torch::Tensor& encoded, const DepthRange& range, DepthSpace space);
torch::Tensor meters_from_encoded(const torch::Tensor& encoded, const DepthRange& range, DepthSpace space);

struct PredictedSample {
  std::optional<DepthMap> depth;            // meters
  std::optional<Grid<int32_t>> labels;
};

std::vector<PredictedSample> predict_samples(MultiTaskNet& net, const std::vector<Sample>& samples,
                                             const DatasetManifest& manifest, DepthSpace space,
                                             int64_t batch_size = 16);

struct EvalReport {
  int64_t images = 0;
  bool has_depth = false;
  bool has_seg = false;
  DepthMetrics depth;  // per-image metrics averaged over the split
  SegScores seg;
};

EvalReport evaluate(MultiTaskNet& net, const std::vector<Sample>& samples, const DatasetManifest& manifest,
                    DepthSpace space, int64_t batch_size = 16);

// Scores stored predictions against ground truth (used when predictions come from files).
EvalReport evaluate_predictions(const std::vector<PredictedSample>& predictions, const std::vector<Sample>& samples,
                                const DatasetManifest& manifest);

// Exactly the keys abs_rel, sq_rel, rmse, rmse_log, delta1, delta2, delta3,
// miou, pixel_acc (nan for a task the model does not predict).
KeyValues eval_report_records(const EvalReport& report);
std::string eval_report_table(const EvalReport& report);
void write_eval_report(const std::string& path, const EvalReport& report);

struct CriticStepStats {
  double loss = 0.0;
  double gp = 0.0;
  double grad_norm = 0.0;
  double real_score = 0.0;  // mean critic score on real maps, summed over critics
  double fake_score = 0.0;
};

struct LogEntry {
  int64_t step = 0;  // generator steps completed
  double lr = 0.0;
  LossReport loss;
};

// Owns the generator, the critics and their optimizers. Not thread-safe.
class Trainer {
 public:
  Trainer(const RunConfig& cfg, const DatasetManifest& manifest);

  const RunConfig& config() const { return cfg_; }
  const DatasetManifest& manifest() const { return manifest_; }
  MultiTaskNet& net() { return net_; }
  std::vector<Critic>& critics() { return critics_; }
  int64_t step() const { return step_; }

  // Samples (augmented when enabled) for generator step s; a pure function of (seed, s).
  std::vector<Sample> batch_for_step(const std::vector<Sample>& train, int64_t s) const;
  TensorBatch to_tensors(const std::vector<Sample>& samples) const;

  // Critic inputs built from predictions (softmax path) or ground truth.
  std::vector<torch::Tensor> fake_maps(const Predictions& pred, const torch::Tensor& images) const;
  std::vector<torch::Tensor> real_maps(const TensorBatch& batch, const std::vector<torch::Tensor>& fake) const;

  // One optimizer step on the summed critic losses; fake maps are detached.
  CriticStepStats train_critic_step(const TensorBatch& batch, const std::vector<torch::Tensor>& fake,
                                    torch::Generator& gen);
  // One optimizer step of the generator at learning rate lr.
  LossReport train_generator_step(const TensorBatch& batch, double lr);
  // Critic steps (unless disabled) followed by one generator step.
  LogEntry train_step(const std::vector<Sample>& train);

  void save_checkpoint(const std::string& path, const KeyValues& metrics = {}) const;
  // Restores parameters, optimizer state and step; the stored config must match.
  void load_checkpoint(const std::string& path);

  // Effective loss weights after ablation switches.
  LossWeights effective_weights() const;

 private:
  RunConfig cfg_;
  DatasetManifest manifest_;
  MultiTaskNet net_{nullptr};
  std::vector<Critic> critics_;
  std::unique_ptr<torch::optim::AdamW> gen_opt_;
  std::unique_ptr<torch::optim::AdamW> critic_opt_;
  int64_t step_ = 0;
};

// One line of log.records: space-separated key=value pairs.
std::string format_log_record(const LogEntry& entry);
LogEntry parse_log_record(const std::string& line);
std::vector<LogEntry> read_log_records(const std::string& path);

struct TrainReport {
  std::vector<LogEntry> log;
  std::vector<std::pair<int64_t, EvalReport>> evals;
  std::string final_checkpoint;
  double wall_seconds = 0.0;
  uint64_t seed = 0;
  int64_t final_step = 0;
  std::string digest;  // generator parameter digest at the end of the run
  int64_t params = 0;  // trainable generator parameters
};

struct FitOptions {
  std::string out_dir;           // empty = keep everything in memory
  std::string resume_from;       // checkpoint to continue from
  std::optional<int64_t> stop_at;  // stop early (simulates an interruption)
  std::function<void(const LogEntry&)> on_step;
};

// Alternating critic/generator optimization with checkpoints and evaluation.
// Run directory layout: config.snapshot, log.records, checkpoints/step_%06d,
// eval/step_%06d.report.
TrainReport fit(const RunConfig& cfg, const Dataset& data, const FitOptions& options = {});

// Configures libtorch threading for reproducible runs.
void configure_determinism(bool deterministic);

struct CheckpointInfo {
  RunConfig config;
  DatasetManifest manifest;
  int64_t step = 0;
  KeyValues metrics;
};

CheckpointInfo read_checkpoint_info(const std::string& path);
// Rebuilds the generator from a checkpoint for inference.
MultiTaskNet load_network(const std::string& path, CheckpointInfo* info = nullptr);

// Checksum of all parameters, for isolation and determinism checks.
std::string parameter_digest(const torch::nn::Module& module);

}  // namespace depthseg
