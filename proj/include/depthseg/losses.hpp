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

#include <functional>

#include <torch/torch.h>

namespace depthseg {

struct LossWeights {
  double alpha_si = 0.5;   // mean-subtraction weight inside the scale-invariant loss
  double alpha_mix = 0.5;  // depth vs segmentation balance
  double beta_adv = 0.01;  // adversarial term weight
  double lambda_gp = 10.0; // gradient-penalty strength

  void validate() const;
};

// One flat record per generator step.
struct LossReport {
  double l_depth = 0.0;
  double l_seg = 0.0;
  double l_gen_adv = 0.0;
  double l_critic = 0.0;
  double gp = 0.0;
  double l_total = 0.0;
  // Mean gradient norm of the critic at the interpolated samples.
  double critic_grad_norm = 0.0;
};

// Maps a batch (B x C x H x W) to one unbounded score per element (B or B x 1).
using CriticFn = std::function<torch::Tensor(const torch::Tensor&)>;

// Scale-invariant log loss: per image, (1/N) sum e^2 - (alpha/N^2) (sum e)^2 with
// e = log(pred) - log(gt) over valid pixels, then averaged over images that
// have at least one valid pixel. pred, gt, valid share shape B x ... .
torch::Tensor depth_scale_invariant_loss(const torch::Tensor& pred, const torch::Tensor& gt,
                                         const torch::Tensor& valid, double alpha_si);

// Same loss, taking log(pred) and log(gt) directly.
torch::Tensor depth_scale_invariant_loss_from_logs(const torch::Tensor& log_pred,
                                                   const torch::Tensor& log_gt,
                                                   const torch::Tensor& valid, double alpha_si);

// Mean over non-ignored pixels of -log softmax(logits)[label].
// logits: B x K x H x W, labels: B x H x W integer.
torch::Tensor segmentation_ce_loss(const torch::Tensor& logits, const torch::Tensor& labels,
                                   int64_t ignore_id);

struct PenaltyTerms {
  torch::Tensor penalty;         // E[(||grad|| - 1)^2], differentiable in critic params
  torch::Tensor mean_grad_norm;  // detached
  torch::Tensor real_score;      // detached E[c(real)], filled by critic_loss
  torch::Tensor fake_score;      // detached E[c(fake)], filled by critic_loss
};

// Interpolates x = eps * real + (1 - eps) * fake with one eps ~ U[0,1] per
// batch element and penalizes the critic gradient norm at x.
PenaltyTerms gradient_penalty(const CriticFn& critic, const torch::Tensor& real,
                              const torch::Tensor& fake, torch::Generator& gen);

// E[c(fake)] - E[c(real)] + lambda_gp * GP. fake is detached.
torch::Tensor critic_loss(const CriticFn& critic, const torch::Tensor& real,
                          const torch::Tensor& fake, double lambda_gp, torch::Generator& gen,
                          PenaltyTerms* terms = nullptr);

// -E[c(fake)].
torch::Tensor generator_adversarial_loss(const CriticFn& critic, const torch::Tensor& fake);

// alpha_mix * l_depth + (1 - alpha_mix) * l_seg + beta_adv * l_gen_adv.
double total_loss(double l_depth, double l_seg, double l_gen_adv, const LossWeights& w);
torch::Tensor total_loss(const torch::Tensor& l_depth, const torch::Tensor& l_seg,
                         const torch::Tensor& l_gen_adv, const LossWeights& w);

}  // namespace depthseg
