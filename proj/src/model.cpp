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
#include "depthseg/model.hpp"

#include <cmath>
#include <string>

#include "depthseg/errors.hpp"

namespace F = torch::nn::functional;

namespace depthseg {

std::pair<int64_t, int64_t> NetConfig::stage_grid(int64_t stage) const {
  const int64_t div = patch_size << stage;
  return {image_height / div, image_width / div};
}

int64_t NetConfig::stage_window(int64_t stage) const {
  auto [gh, gw] = stage_grid(stage);
  return std::min({window_size, gh, gw});
}

void NetConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("model config: " + msg); };
  if (in_channels < 1) fail("in_channels must be >= 1");
  if (num_classes < 2) fail("num_classes must be >= 2");
  if (patch_size < 1) fail("patch_size must be >= 1");
  if (window_size < 1) fail("window_size must be >= 1");
  if (embed_dim < 1) fail("embed_dim must be >= 1");
  if (decoder_channels < 2) fail("decoder_channels must be >= 2");
  if (mlp_ratio < 1) fail("mlp_ratio must be >= 1");
  if (depths.empty()) fail("depths must list at least one stage");
  if (heads.size() != depths.size()) fail("heads must list one entry per stage");
  const int64_t div = patch_size << (stages() - 1);
  if (image_height < 1 || image_width < 1 || image_height % div != 0 || image_width % div != 0) {
    fail("image size " + std::to_string(image_height) + "x" + std::to_string(image_width) +
         " must be divisible by patch_size*2^(stages-1) = " + std::to_string(div));
  }
  for (int64_t s = 0; s < stages(); ++s) {
    const int64_t dim = embed_dim << s;
    if (depths[s] < 1) fail("depths[" + std::to_string(s) + "] must be >= 1");
    if (heads[s] < 1 || dim % heads[s] != 0) {
      fail("heads[" + std::to_string(s) + "]=" + std::to_string(heads[s]) +
           " must divide the stage width " + std::to_string(dim));
    }
    auto [gh, gw] = stage_grid(s);
    const int64_t w = stage_window(s);
    if (gh % w != 0 || gw % w != 0) {
      fail("window " + std::to_string(w) + " must divide the stage " + std::to_string(s) +
           " token grid " + std::to_string(gh) + "x" + std::to_string(gw));
    }
  }
}

namespace {

// B x H x W x C -> (B * windows) x (w * w) x C
torch::Tensor window_partition(const torch::Tensor& x, int64_t w) {
  const int64_t b = x.size(0), h = x.size(1), wd = x.size(2), c = x.size(3);
  return x.view({b, h / w, w, wd / w, w, c}).permute({0, 1, 3, 2, 4, 5}).reshape({-1, w * w, c});
}

torch::Tensor window_reverse(const torch::Tensor& windows, int64_t w, int64_t h, int64_t wd) {
  const int64_t c = windows.size(2);
  const int64_t b = windows.size(0) / ((h / w) * (wd / w));
  return windows.view({b, h / w, wd / w, w, w, c}).permute({0, 1, 3, 2, 4, 5}).reshape({b, h, wd, c});
}

torch::Tensor upsample(const torch::Tensor& x, double factor) {
  return F::interpolate(x, F::InterpolateFuncOptions()
                               .scale_factor(std::vector<double>{factor, factor})
                               .mode(torch::kBilinear)
                               .align_corners(false));
}

torch::nn::Conv2d conv(int64_t in, int64_t out, int64_t k, int64_t stride = 1, int64_t pad = 0) {
  return torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, k).stride(stride).padding(pad));
}

torch::nn::Sequential mlp_head(int64_t channels, int64_t out) {
  return torch::nn::Sequential(conv(channels, channels, 1), torch::nn::GELU(), conv(channels, out, 1));
}

// B x L x C tokens on an h x w grid -> B x C x h x w
torch::Tensor tokens_to_map(const torch::Tensor& x, int64_t h, int64_t w) {
  return x.transpose(1, 2).reshape({x.size(0), x.size(2), h, w});
}

}  // namespace

torch::Tensor shifted_window_mask(int64_t height, int64_t width, int64_t window, int64_t shift) {
  auto labels = torch::zeros({1, height, width, 1});
  auto acc = labels.accessor<float, 4>();
  auto band = [&](int64_t i, int64_t n) {
    if (i < n - window) return 0;
    if (i < n - shift) return 1;
    return 2;
  };
  for (int64_t r = 0; r < height; ++r) {
    for (int64_t c = 0; c < width; ++c) acc[0][r][c][0] = static_cast<float>(band(r, height) * 3 + band(c, width));
  }
  auto windows = window_partition(labels, window).squeeze(-1);  // nW x N
  auto diff = windows.unsqueeze(1) - windows.unsqueeze(2);
  return torch::where(diff != 0, torch::full_like(diff, -100.0), torch::zeros_like(diff));
}

WindowAttentionImpl::WindowAttentionImpl(int64_t dim_, int64_t window_, int64_t heads_)
    : dim(dim_), window(window_), num_heads(heads_) {
  scale = 1.0 / std::sqrt(static_cast<double>(dim / num_heads));
  qkv = register_module("qkv", torch::nn::Linear(dim, 3 * dim));
  proj = register_module("proj", torch::nn::Linear(dim, dim));
  const int64_t span = 2 * window - 1;
  relative_position_bias_table =
      register_parameter("relative_position_bias_table", torch::zeros({span * span, num_heads}));
  const int64_t n = window * window;
  auto index = torch::empty({n, n}, torch::kLong);
  auto acc = index.accessor<int64_t, 2>();
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < n; ++j) {
      const int64_t dy = i / window - j / window + window - 1;
      const int64_t dx = i % window - j % window + window - 1;
      acc[i][j] = dy * span + dx;
    }
  }
  relative_position_index = register_buffer("relative_position_index", index);
}

torch::Tensor WindowAttentionImpl::forward(const torch::Tensor& x, const torch::Tensor& mask) {
  const int64_t bw = x.size(0), n = x.size(1), c = x.size(2);
  const int64_t head_dim = c / num_heads;
  auto qkv_out = qkv(x).reshape({bw, n, 3, num_heads, head_dim}).permute({2, 0, 3, 1, 4});
  auto q = qkv_out[0] * scale;
  auto k = qkv_out[1];
  auto v = qkv_out[2];
  auto attn = torch::matmul(q, k.transpose(-2, -1));
  auto bias = relative_position_bias_table.index_select(0, relative_position_index.to(torch::kLong).view({-1}))
                  .view({n, n, num_heads})
                  .permute({2, 0, 1});
  attn = attn + bias.unsqueeze(0);
  if (mask.defined()) {
    const int64_t nw = mask.size(0);
    attn = attn.view({bw / nw, nw, num_heads, n, n}) + mask.unsqueeze(1).unsqueeze(0);
    attn = attn.view({bw, num_heads, n, n});
  }
  attn = torch::softmax(attn, -1);
  auto out = torch::matmul(attn, v).transpose(1, 2).reshape({bw, n, c});
  return proj(out);
}

SwinBlockImpl::SwinBlockImpl(int64_t dim_, int64_t gh, int64_t gw, int64_t heads, int64_t window_,
                             int64_t shift_, int64_t mlp_ratio)
    : dim(dim_), grid_h(gh), grid_w(gw), window(window_), shift(shift_) {
  norm1 = register_module("norm1", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim})));
  attn = register_module("attn", WindowAttention(dim, window, heads));
  norm2 = register_module("norm2", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim})));
  fc1 = register_module("fc1", torch::nn::Linear(dim, dim * mlp_ratio));
  fc2 = register_module("fc2", torch::nn::Linear(dim * mlp_ratio, dim));
  if (shift > 0) attn_mask = register_buffer("attn_mask", shifted_window_mask(grid_h, grid_w, window, shift));
}

torch::Tensor SwinBlockImpl::forward(const torch::Tensor& x) {
  const int64_t b = x.size(0), c = x.size(2);
  auto h = norm1(x).view({b, grid_h, grid_w, c});
  if (shift > 0) h = torch::roll(h, {-shift, -shift}, {1, 2});
  auto windows = attn(window_partition(h, window), attn_mask);
  h = window_reverse(windows, window, grid_h, grid_w);
  if (shift > 0) h = torch::roll(h, {shift, shift}, {1, 2});
  auto y = x + h.reshape({b, grid_h * grid_w, c});
  return y + fc2(F::gelu(fc1(norm2(y))));
}

PatchMergingImpl::PatchMergingImpl(int64_t dim_, int64_t gh, int64_t gw) : dim(dim_), grid_h(gh), grid_w(gw) {
  norm = register_module("norm", torch::nn::LayerNorm(torch::nn::LayerNormOptions({4 * dim})));
  reduction = register_module("reduction", torch::nn::Linear(torch::nn::LinearOptions(4 * dim, 2 * dim).bias(false)));
}

torch::Tensor PatchMergingImpl::forward(const torch::Tensor& x) {
  using torch::indexing::None;
  using torch::indexing::Slice;
  const int64_t b = x.size(0);
  auto g = x.view({b, grid_h, grid_w, dim});
  auto x0 = g.index({Slice(), Slice(0, None, 2), Slice(0, None, 2)});
  auto x1 = g.index({Slice(), Slice(1, None, 2), Slice(0, None, 2)});
  auto x2 = g.index({Slice(), Slice(0, None, 2), Slice(1, None, 2)});
  auto x3 = g.index({Slice(), Slice(1, None, 2), Slice(1, None, 2)});
  auto merged = torch::cat({x0, x1, x2, x3}, -1).reshape({b, -1, 4 * dim});
  return reduction(norm(merged));
}

MultiTaskNetImpl::MultiTaskNetImpl(const NetConfig& c) : cfg(c) {
  cfg.validate();
  const int64_t d = cfg.decoder_channels;
  patch_embed = register_module(
      "patch_embed", conv(cfg.in_channels, cfg.embed_dim, cfg.patch_size, cfg.patch_size));
  embed_norm = register_module("embed_norm", torch::nn::LayerNorm(torch::nn::LayerNormOptions({cfg.embed_dim})));
  blocks = register_module("blocks", torch::nn::ModuleList());
  merges = register_module("merges", torch::nn::ModuleList());
  fuse = register_module("fuse", torch::nn::ModuleList());
  for (int64_t s = 0; s < cfg.stages(); ++s) {
    const int64_t dim = cfg.embed_dim << s;
    auto [gh, gw] = cfg.stage_grid(s);
    const int64_t w = cfg.stage_window(s);
    // A window covering the whole grid has nothing to shift across.
    const int64_t shift = (gh > w || gw > w) ? w / 2 : 0;
    for (int64_t i = 0; i < cfg.depths[s]; ++i) {
      blocks->push_back(SwinBlock(dim, gh, gw, cfg.heads[s], w, (i % 2 == 1) ? shift : 0, cfg.mlp_ratio));
    }
    stage_norms.push_back(register_module("stage_norm" + std::to_string(s),
                                          torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim}))));
    if (s + 1 < cfg.stages()) merges->push_back(PatchMerging(dim, gh, gw));
  }
  const int64_t last_dim = cfg.embed_dim << (cfg.stages() - 1);
  bottleneck = register_module("bottleneck", conv(last_dim, d, 1));
  for (int64_t s = cfg.stages() - 2; s >= 0; --s) {
    fuse->push_back(conv(d + (cfg.embed_dim << s), d, 3, 1, 1));
  }
  pixel_stem = register_module("pixel_stem", conv(cfg.in_channels, d / 2, 3, 1, 1));
  full_res_fuse = register_module("full_res_fuse", conv(d + d / 2, d, 3, 1, 1));
  if (cfg.tasks != Tasks::SegOnly) depth_head = register_module("depth_head", mlp_head(d, 1));
  if (cfg.tasks != Tasks::DepthOnly) seg_head = register_module("seg_head", mlp_head(d, cfg.num_classes));
}

std::vector<torch::Tensor> MultiTaskNetImpl::encode(const torch::Tensor& images) {
  auto x = patch_embed(images);
  x = embed_norm(x.flatten(2).transpose(1, 2));
  std::vector<torch::Tensor> features;
  size_t block = 0;
  for (int64_t s = 0; s < cfg.stages(); ++s) {
    auto [gh, gw] = cfg.stage_grid(s);
    for (int64_t i = 0; i < cfg.depths[s]; ++i) x = blocks[block++]->as<SwinBlock>()->forward(x);
    features.push_back(tokens_to_map(stage_norms[s](x), gh, gw));
    if (s + 1 < cfg.stages()) x = merges[s]->as<PatchMerging>()->forward(x);
  }
  return features;
}

torch::Tensor MultiTaskNetImpl::decode(const std::vector<torch::Tensor>& features, const torch::Tensor& images) {
  auto y = F::gelu(bottleneck(features.back()));
  size_t step = 0;
  for (int64_t s = cfg.stages() - 2; s >= 0; --s) {
    y = upsample(y, 2.0);
    y = F::gelu(fuse[step++]->as<torch::nn::Conv2d>()->forward(torch::cat({y, features[s]}, 1)));
  }
  y = upsample(y, static_cast<double>(cfg.patch_size));
  auto pixels = F::gelu(pixel_stem(images));
  return F::gelu(full_res_fuse(torch::cat({y, pixels}, 1)));
}

Predictions MultiTaskNetImpl::forward(const torch::Tensor& images) {
  if (images.dim() != 4 || images.size(1) != cfg.in_channels || images.size(2) != cfg.image_height ||
      images.size(3) != cfg.image_width) {
    throw DataError("network input must be B x " + std::to_string(cfg.in_channels) + " x " +
                    std::to_string(cfg.image_height) + " x " + std::to_string(cfg.image_width));
  }
  auto shared = decode(encode(images), images);
  Predictions out;
  if (depth_head) out.log_depth = torch::sigmoid(depth_head->forward(shared));
  if (seg_head) out.seg_logits = seg_head->forward(shared);
  return out;
}

CriticImpl::CriticImpl(int64_t in_channels, int64_t base) {
  features = register_module(
      "features",
      torch::nn::Sequential(conv(in_channels, base, 4, 2, 1), torch::nn::LeakyReLU(torch::nn::LeakyReLUOptions().negative_slope(0.2)),
                            conv(base, 2 * base, 4, 2, 1), torch::nn::LeakyReLU(torch::nn::LeakyReLUOptions().negative_slope(0.2)),
                            conv(2 * base, 4 * base, 4, 2, 1), torch::nn::LeakyReLU(torch::nn::LeakyReLUOptions().negative_slope(0.2)),
                            conv(4 * base, 8 * base, 4, 2, 1), torch::nn::LeakyReLU(torch::nn::LeakyReLUOptions().negative_slope(0.2))));
  score = register_module("score", torch::nn::Linear(8 * base, 1));
}

torch::Tensor CriticImpl::forward(const torch::Tensor& x) {
  return score(features->forward(x).mean({2, 3}));
}

void initialize_parameters(torch::nn::Module& module, torch::Generator& gen) {
  torch::NoGradGuard no_grad;
  for (auto& item : module.named_parameters(/*recurse=*/true)) {
    const std::string& name = item.key();
    auto& p = item.value();
    auto opts = p.options().requires_grad(false);
    if (name.ends_with("relative_position_bias_table")) {
      p.copy_(torch::randn(p.sizes(), gen, opts) * 0.02);
    } else if (p.dim() >= 2) {
      const double fan_in = static_cast<double>(p[0].numel());
      const double bound = 1.0 / std::sqrt(fan_in);
      p.copy_((torch::rand(p.sizes(), gen, opts) * 2.0 - 1.0) * bound);
    } else if (name.ends_with("weight")) {
      p.fill_(1.0);
    } else {
      p.zero_();
    }
  }
}

MultiTaskNet build_network(const NetConfig& cfg, torch::Generator& gen,
                           const std::optional<NamedArrays>& external_weights) {
  MultiTaskNet net(cfg);
  initialize_parameters(*net, gen);
  if (external_weights) {
    torch::NoGradGuard no_grad;
    auto params = net->named_parameters(true);
    for (const auto& [name, value] : *external_weights) {
      auto* p = params.find(name);
      if (!p) throw ConfigError("external weights: no parameter named '" + name + "'");
      if (p->sizes() != value.sizes()) throw ConfigError("external weights: shape mismatch for '" + name + "'");
      p->copy_(value);
    }
  }
  return net;
}

Critic build_critic(int64_t in_channels, torch::Generator& gen, int64_t base_channels) {
  if (in_channels < 1 || base_channels < 1) throw ConfigError("critic: channel counts must be >= 1");
  Critic critic(in_channels, base_channels);
  initialize_parameters(*critic, gen);
  return critic;
}

torch::Tensor make_joint_map(const torch::Tensor& depth, const torch::Tensor& seg_logits) {
  if (depth.dim() != 4 || depth.size(1) != 1 || seg_logits.dim() != 4 || seg_logits.size(0) != depth.size(0) ||
      seg_logits.size(2) != depth.size(2) || seg_logits.size(3) != depth.size(3)) {
    throw std::invalid_argument("make_joint_map: expected depth B x 1 x H x W and logits B x K x H x W");
  }
  return torch::cat({depth, torch::softmax(seg_logits, 1)}, 1);
}

torch::Tensor make_joint_map_from_labels(const torch::Tensor& depth, const torch::Tensor& labels,
                                         int64_t num_classes, int64_t ignore_id, torch::Tensor* scored_mask) {
  if (depth.dim() != 4 || depth.size(1) != 1 || labels.dim() != 3 || labels.size(0) != depth.size(0) ||
      labels.size(1) != depth.size(2) || labels.size(2) != depth.size(3)) {
    throw std::invalid_argument("make_joint_map: expected depth B x 1 x H x W and labels B x H x W");
  }
  if (labels.is_floating_point() && !torch::equal(labels, torch::round(labels))) {
    throw DataError("make_joint_map: label map contains non-integer values");
  }
  auto lab = labels.to(torch::kLong);
  auto scored = lab != ignore_id;
  if ((scored & ((lab < 0) | (lab >= num_classes))).any().item<bool>()) {
    throw DataError("make_joint_map: label outside [0, K) that is not the ignore id");
  }
  auto safe = torch::where(scored, lab, torch::zeros_like(lab));
  auto onehot = F::one_hot(safe, num_classes).permute({0, 3, 1, 2}).to(depth.scalar_type());
  auto m = scored.unsqueeze(1).to(depth.scalar_type());
  if (scored_mask) *scored_mask = m;
  return torch::cat({depth, onehot * m}, 1);
}

int64_t count_params(const torch::nn::Module& module) {
  int64_t n = 0;
  for (const auto& p : module.parameters(true)) {
    if (p.requires_grad()) n += p.numel();
  }
  return n;
}

}  // namespace depthseg
