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
#include "depthseg/losses.hpp"

#include <cmath>
#include <string>

#include "depthseg/errors.hpp"

namespace depthseg {

void LossWeights::validate() const {
  auto in_unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  if (!in_unit(alpha_si)) throw ConfigError("loss.alpha_si must lie in [0, 1]");
  if (!in_unit(alpha_mix)) throw ConfigError("loss.alpha_mix must lie in [0, 1]");
  if (!std::isfinite(beta_adv) || beta_adv < 0.0) throw ConfigError("loss.beta_adv must be >= 0");
  if (!std::isfinite(lambda_gp) || lambda_gp < 0.0) throw ConfigError("loss.lambda_gp must be >= 0");
}

torch::Tensor depth_scale_invariant_loss_from_logs(const torch::Tensor& log_pred,
                                                   const torch::Tensor& log_gt,
                                                   const torch::Tensor& valid, double alpha_si) {
  if (log_pred.sizes() != log_gt.sizes() || log_pred.sizes() != valid.sizes()) {
    throw std::invalid_argument("depth loss: prediction, ground truth and mask shapes differ");
  }
  if (log_pred.dim() < 1 || log_pred.size(0) == 0) throw std::invalid_argument("depth loss: empty batch");
  const int64_t batch = log_pred.size(0);
  auto mask = valid.to(log_pred.scalar_type()).reshape({batch, -1});
  // Zero the non-valid entries before any arithmetic so their gradients vanish.
  auto e = torch::where(mask > 0, log_pred.reshape({batch, -1}) - log_gt.reshape({batch, -1}).to(log_pred.scalar_type()),
                        torch::zeros_like(mask));
  auto n = mask.sum(1);
  auto has_pixels = n > 0;
  const int64_t images = has_pixels.sum().item<int64_t>();
  if (images == 0) throw DataError("depth loss: no valid pixel in the batch");
  auto n_safe = torch::where(has_pixels, n, torch::ones_like(n));
  auto sum_sq = (e * e).sum(1);
  auto sum = e.sum(1);
  auto per_image = sum_sq / n_safe - alpha_si * (sum * sum) / (n_safe * n_safe);
  per_image = torch::where(has_pixels, per_image, torch::zeros_like(per_image));
  return per_image.sum() / static_cast<double>(images);
}

torch::Tensor depth_scale_invariant_loss(const torch::Tensor& pred, const torch::Tensor& gt,
                                         const torch::Tensor& valid, double alpha_si) {
  if (pred.sizes() != gt.sizes() || pred.sizes() != valid.sizes()) {
    throw std::invalid_argument("depth loss: prediction, ground truth and mask shapes differ");
  }
  auto v = valid.to(torch::kBool);
  if ((v & ~(pred > 0)).any().item<bool>()) {
    throw DataError("depth loss: non-positive prediction on a valid pixel");
  }
  if ((v & ~(gt > 0)).any().item<bool>()) {
    throw DataError("depth loss: non-positive ground truth on a valid pixel");
  }
  auto one = torch::ones_like(pred);
  auto log_pred = torch::log(torch::where(v, pred, one));
  auto log_gt = torch::log(torch::where(v, gt.to(pred.scalar_type()), one));
  return depth_scale_invariant_loss_from_logs(log_pred, log_gt, v, alpha_si);
}

torch::Tensor segmentation_ce_loss(const torch::Tensor& logits, const torch::Tensor& labels,
                                   int64_t ignore_id) {
  if (logits.dim() != 4 || labels.dim() != 3 || logits.size(0) != labels.size(0) ||
      logits.size(2) != labels.size(1) || logits.size(3) != labels.size(2)) {
    throw std::invalid_argument("segmentation loss: expected logits B x K x H x W and labels B x H x W");
  }
  const int64_t k = logits.size(1);
  auto lab = labels.to(torch::kLong);
  auto scored = lab != ignore_id;
  if ((scored & ((lab < 0) | (lab >= k))).any().item<bool>()) {
    throw DataError("segmentation loss: label outside [0, " + std::to_string(k) +
                    ") that is not the ignore id");
  }
  const int64_t count = scored.sum().item<int64_t>();
  if (count == 0) throw DataError("segmentation loss: every pixel is ignored");
  auto log_prob = torch::log_softmax(logits, 1);
  auto safe = torch::where(scored, lab, torch::zeros_like(lab));
  auto picked = log_prob.gather(1, safe.unsqueeze(1)).squeeze(1);
  auto nll = torch::where(scored, -picked, torch::zeros_like(picked));
  return nll.sum() / static_cast<double>(count);
}

namespace {

torch::Tensor scores(const CriticFn& critic, const torch::Tensor& x) {
  auto s = critic(x);
  return s.reshape({x.size(0)});
}

}  // namespace

PenaltyTerms gradient_penalty(const CriticFn& critic, const torch::Tensor& real,
                              const torch::Tensor& fake, torch::Generator& gen) {
  if (real.sizes() != fake.sizes()) throw std::invalid_argument("gradient penalty: real/fake shapes differ");
  if (real.dim() < 1 || real.size(0) == 0) throw std::invalid_argument("gradient penalty: empty batch");
  const int64_t batch = real.size(0);
  std::vector<int64_t> eps_shape(static_cast<size_t>(real.dim()), 1);
  eps_shape[0] = batch;
  auto eps = torch::rand(eps_shape, gen, real.options().requires_grad(false));
  // The penalty needs input gradients even when the caller runs without grad.
  torch::AutoGradMode grad_mode(true);
  auto mixed = (eps * real.detach() + (1.0 - eps) * fake.detach()).requires_grad_(true);
  auto out = scores(critic, mixed);
  torch::Tensor grad;
  if (out.requires_grad()) {
    grad = torch::autograd::grad({out.sum()}, {mixed}, {}, /*retain_graph=*/true,
                                 /*create_graph=*/true, /*allow_unused=*/true)[0];
  }
  if (!grad.defined()) grad = torch::zeros_like(mixed);
  auto norm = grad.reshape({batch, -1}).pow(2).sum(1).sqrt();
  PenaltyTerms terms;
  terms.penalty = (norm - 1.0).pow(2).mean();
  terms.mean_grad_norm = norm.detach().mean();
  return terms;
}

torch::Tensor critic_loss(const CriticFn& critic, const torch::Tensor& real,
                          const torch::Tensor& fake, double lambda_gp, torch::Generator& gen,
                          PenaltyTerms* terms) {
  auto fake_d = fake.detach();
  auto real_d = real.detach();
  PenaltyTerms gp = gradient_penalty(critic, real_d, fake_d, gen);
  auto fake_score = scores(critic, fake_d).mean();
  auto real_score = scores(critic, real_d).mean();
  auto loss = fake_score - real_score + lambda_gp * gp.penalty;
  if (terms) {
    *terms = gp;
    terms->real_score = real_score.detach();
    terms->fake_score = fake_score.detach();
  }
  return loss;
}

torch::Tensor generator_adversarial_loss(const CriticFn& critic, const torch::Tensor& fake) {
  if (fake.dim() < 1 || fake.size(0) == 0) throw std::invalid_argument("adversarial loss: empty batch");
  return -scores(critic, fake).mean();
}

double total_loss(double l_depth, double l_seg, double l_gen_adv, const LossWeights& w) {
  if (!std::isfinite(l_depth) || !std::isfinite(l_seg) || !std::isfinite(l_gen_adv)) {
    throw DivergenceError("total loss: non-finite component (depth=" + std::to_string(l_depth) +
                          " seg=" + std::to_string(l_seg) + " adv=" + std::to_string(l_gen_adv) + ")");
  }
  return w.alpha_mix * l_depth + (1.0 - w.alpha_mix) * l_seg + w.beta_adv * l_gen_adv;
}

torch::Tensor total_loss(const torch::Tensor& l_depth, const torch::Tensor& l_seg,
                         const torch::Tensor& l_gen_adv, const LossWeights& w) {
  // Validates finiteness on the scalar values.
  total_loss(l_depth.item<double>(), l_seg.item<double>(), l_gen_adv.item<double>(), w);
  return w.alpha_mix * l_depth + (1.0 - w.alpha_mix) * l_seg + w.beta_adv * l_gen_adv;
}

}  // namespace depthseg
