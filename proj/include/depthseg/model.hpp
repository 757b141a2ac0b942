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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <torch/torch.h>

namespace depthseg {

enum class Tasks { Both, DepthOnly, SegOnly };

struct NetConfig {
  int64_t in_channels = 3;
  int64_t num_classes = 5;
  int64_t patch_size = 4;
  int64_t window_size = 4;
  int64_t embed_dim = 48;
  std::vector<int64_t> depths{2, 2, 2};
  std::vector<int64_t> heads{3, 6, 12};
  int64_t mlp_ratio = 4;
  int64_t decoder_channels = 16;
  int64_t image_height = 64;
  int64_t image_width = 64;
  Tasks tasks = Tasks::Both;

  int64_t stages() const { return static_cast<int64_t>(depths.size()); }
  // Token grid (rows, cols) of a stage.
  std::pair<int64_t, int64_t> stage_grid(int64_t stage) const;
  // Window side actually used at a stage: min(window_size, grid side).
  int64_t stage_window(int64_t stage) const;

  // Throws ConfigError naming the violated constraint.
  void validate() const;
  bool operator==(const NetConfig&) const = default;
};

struct Predictions {
  torch::Tensor log_depth;   // B x 1 x H x W in (0, 1); undefined without a depth head
  torch::Tensor seg_logits;  // B x K x H x W; undefined without a segmentation head
};

// Attention mask (windows x N x N) for shifted windows: 0 where two tokens of
// the same window come from the same image region, -100 otherwise.
torch::Tensor shifted_window_mask(int64_t height, int64_t width, int64_t window, int64_t shift);

struct WindowAttentionImpl : torch::nn::Module {
  WindowAttentionImpl(int64_t dim, int64_t window, int64_t num_heads);
  // x: (num_windows * B) x N x C; mask: num_windows x N x N or undefined.
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& mask);

  int64_t dim, window, num_heads;
  double scale;
  torch::nn::Linear qkv{nullptr}, proj{nullptr};
  torch::Tensor relative_position_bias_table;
  torch::Tensor relative_position_index;
};
TORCH_MODULE(WindowAttention);

struct SwinBlockImpl : torch::nn::Module {
  SwinBlockImpl(int64_t dim, int64_t grid_h, int64_t grid_w, int64_t num_heads, int64_t window,
                int64_t shift, int64_t mlp_ratio);
  // x: B x (grid_h * grid_w) x C
  torch::Tensor forward(const torch::Tensor& x);

  int64_t dim, grid_h, grid_w, window, shift;
  torch::nn::LayerNorm norm1{nullptr}, norm2{nullptr};
  WindowAttention attn{nullptr};
  torch::nn::Linear fc1{nullptr}, fc2{nullptr};
  torch::Tensor attn_mask;
};
TORCH_MODULE(SwinBlock);

struct PatchMergingImpl : torch::nn::Module {
  PatchMergingImpl(int64_t dim, int64_t grid_h, int64_t grid_w);
  torch::Tensor forward(const torch::Tensor& x);

  int64_t dim, grid_h, grid_w;
  torch::nn::LayerNorm norm{nullptr};
  torch::nn::Linear reduction{nullptr};
};
TORCH_MODULE(PatchMerging);

// Shared encoder-decoder with per-pixel depth and segmentation heads.
struct MultiTaskNetImpl : torch::nn::Module {
  explicit MultiTaskNetImpl(const NetConfig& cfg);
  Predictions forward(const torch::Tensor& images);

  // Encoder outputs per stage, each B x C_s x h_s x w_s.
  std::vector<torch::Tensor> encode(const torch::Tensor& images);
  // Decoder output: B x decoder_channels x H x W.
  torch::Tensor decode(const std::vector<torch::Tensor>& features, const torch::Tensor& images);

  NetConfig cfg;
  torch::nn::Conv2d patch_embed{nullptr};
  torch::nn::LayerNorm embed_norm{nullptr};
  torch::nn::ModuleList blocks{nullptr};   // all encoder blocks, stage by stage
  torch::nn::ModuleList merges{nullptr};   // stages - 1 merging layers
  std::vector<torch::nn::LayerNorm> stage_norms;
  torch::nn::Conv2d pixel_stem{nullptr};
  torch::nn::Conv2d bottleneck{nullptr};
  torch::nn::ModuleList fuse{nullptr};     // one per upsampling step between stages
  torch::nn::Conv2d full_res_fuse{nullptr};
  torch::nn::Sequential depth_head{nullptr};
  torch::nn::Sequential seg_head{nullptr};
};
TORCH_MODULE(MultiTaskNet);

// Strided convolutional scorer: 4 stride-2 stages with leaky rectifiers, global
// average pooling and a linear layer to one unbounded score per sample.
struct CriticImpl : torch::nn::Module {
  CriticImpl(int64_t in_channels, int64_t base_channels = 32);
  torch::Tensor forward(const torch::Tensor& x);  // B x 1

  torch::nn::Sequential features{nullptr};
  torch::nn::Linear score{nullptr};
};
TORCH_MODULE(Critic);

using NamedArrays = std::map<std::string, torch::Tensor>;

// Builds and deterministically initializes the generator from gen. Entries of
// external_weights overwrite parameters of the same name (shape must match).
MultiTaskNet build_network(const NetConfig& cfg, torch::Generator& gen,
                           const std::optional<NamedArrays>& external_weights = std::nullopt);

Critic build_critic(int64_t in_channels, torch::Generator& gen, int64_t base_channels = 32);

// Channel 0 = depth (already in [0, 1]), channels 1..K = softmax(seg_logits).
torch::Tensor make_joint_map(const torch::Tensor& depth, const torch::Tensor& seg_logits);

// Ground-truth path: one-hot labels; ignore_id pixels get all-zero segmentation
// channels and are cleared in *scored_mask (B x 1 x H x W) when given.
torch::Tensor make_joint_map_from_labels(const torch::Tensor& depth, const torch::Tensor& labels,
                                         int64_t num_classes, int64_t ignore_id,
                                         torch::Tensor* scored_mask = nullptr);

// Number of trainable scalars.
int64_t count_params(const torch::nn::Module& module);

// Deterministic initializer used by the builders: fan-in uniform for weights,
// zero biases, unit/zero layer norms, N(0, 0.02) relative-position tables.
void initialize_parameters(torch::nn::Module& module, torch::Generator& gen);

}  // namespace depthseg
