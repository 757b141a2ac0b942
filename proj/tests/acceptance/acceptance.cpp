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
// Acceptance gate: one PASS/FAIL line per criterion, exit status 0 only when
// every criterion passes. Usage: depthseg_acceptance [--work DIR] [--only N,...]

#include <algorithm>
#include <cstdarg>
#include <optional>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "depthseg/augment.hpp"
#include "depthseg/depth_space.hpp"
#include "depthseg/losses.hpp"
#include "depthseg/metrics.hpp"
#include "depthseg/model.hpp"
#include "depthseg/training.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace depthseg {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using testing::f64;
using testing::gather;
using testing::generator;
using testing::numeric_gradient;
using testing::relative_error;
using testing::sample_coords;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[1024];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<std::vector<double>> rows_of(const torch::Tensor& t) {
  auto flat = t.reshape({t.size(0), -1}).contiguous();
  std::vector<std::vector<double>> out;
  for (int64_t b = 0; b < flat.size(0); ++b) {
    auto row = flat[b];
    out.emplace_back(row.data_ptr<double>(), row.data_ptr<double>() + row.numel());
  }
  return out;
}

CriticFn tanh_critic(const torch::Tensor& a) {
  return [a](const torch::Tensor& x) { return torch::tanh(a * x.reshape({x.size(0), -1})).sum(1, true); };
}

// ---------------------------------------------------------------------------

Outcome loss_oracles() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> depth(0.2, 50.0);
  std::bernoulli_distribution keep(0.8);
  std::normal_distribution<double> z(0.0, 3.0);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    // Scale-invariant depth loss on a 4x4 map.
    auto pred = torch::empty({1, 1, 4, 4}, f64()), gt = torch::empty({1, 1, 4, 4}, f64());
    auto valid = torch::empty({1, 1, 4, 4}, torch::kBool);
    oracle::DepthImage img;
    for (int64_t i = 0; i < 16; ++i) {
      const double p = depth(rng), g = depth(rng);
      const bool v = keep(rng) || i == 0;
      pred[0][0][i / 4][i % 4] = p;
      gt[0][0][i / 4][i % 4] = g;
      valid[0][0][i / 4][i % 4] = v;
      img.pred.push_back(p);
      img.gt.push_back(g);
      img.valid.push_back(v);
    }
    for (double alpha : {0.0, 0.5, 1.0}) {
      worst = std::max(worst, std::fabs(depth_scale_invariant_loss(pred, gt, valid, alpha).item<double>() -
                                        oracle::scale_invariant({img}, alpha)));
    }
    // Cross-entropy on a 4x4 map with K = 4 and some ignored pixels.
    auto logits = torch::empty({1, 4, 4, 4}, f64());
    auto labels = torch::empty({1, 4, 4}, torch::kLong);
    std::vector<std::vector<double>> px_logits;
    std::vector<int> px_labels;
    for (int64_t i = 0; i < 16; ++i) {
      std::vector<double> px;
      for (int64_t k = 0; k < 4; ++k) {
        const double v = z(rng);
        logits[0][k][i / 4][i % 4] = v;
        px.push_back(v);
      }
      int l = static_cast<int>(rng() % 5);
      if (l == 4 && i != 0) l = 255;
      if (l == 4) l = 0;
      labels[0][i / 4][i % 4] = l;
      px_logits.push_back(px);
      px_labels.push_back(l);
    }
    worst = std::max(worst, std::fabs(segmentation_ce_loss(logits, labels, 255).item<double>() -
                                      oracle::cross_entropy(px_logits, px_labels, 255)));
    // Gradient penalty, critic loss and generator loss with a tanh critic.
    auto g = generator(100 + trial);
    auto a = torch::randn({16}, g, f64()) * 0.5;
    auto real = torch::rand({3, 1, 4, 4}, g, f64()), fake = torch::rand({3, 1, 4, 4}, g, f64());
    oracle::TanhCritic c{std::vector<double>(a.data_ptr<double>(), a.data_ptr<double>() + 16)};
    auto eps_gen = generator(7 + trial);
    auto eps_t = torch::rand({3, 1, 1, 1}, eps_gen, f64()).reshape({3});
    std::vector<double> eps(eps_t.data_ptr<double>(), eps_t.data_ptr<double>() + 3);
    const double gp_oracle = oracle::gradient_penalty(c, rows_of(real), rows_of(fake), eps);
    auto gp_gen = generator(7 + trial);
    worst = std::max(worst, std::fabs(gradient_penalty(tanh_critic(a), real, fake, gp_gen).penalty.item<double>() -
                                      gp_oracle));
    auto loss_gen = generator(7 + trial);
    const double critic_expect =
        oracle::mean_score(c, rows_of(fake)) - oracle::mean_score(c, rows_of(real)) + 10.0 * gp_oracle;
    worst = std::max(worst, std::fabs(critic_loss(tanh_critic(a), real, fake, 10.0, loss_gen).item<double>() -
                                      critic_expect));
    worst = std::max(worst, std::fabs(generator_adversarial_loss(tanh_critic(a), fake).item<double>() +
                                      oracle::mean_score(c, rows_of(fake))));
  }
  // Worked values: errors (ln 2, 0) at alpha 0.5, and logits (1, 0) against class 0.
  auto pred = torch::tensor({2.0, 1.0}, f64()).reshape({1, 1, 1, 2});
  auto gt = torch::tensor({1.0, 1.0}, f64()).reshape({1, 1, 1, 2});
  const double worked = depth_scale_invariant_loss(pred, gt, torch::ones({1, 1, 1, 2}, torch::kBool), 0.5).item<double>();
  auto two = torch::tensor({1.0, 0.0}, f64()).reshape({1, 2, 1, 1});
  const double ce = segmentation_ce_loss(two, torch::zeros({1, 1, 1}, torch::kLong), 255).item<double>();
  const double secs = seconds_since(t0);
  const bool ok = worst < 1e-10 && std::fabs(worked - 0.18017) < 5e-6 && std::fabs(ce - 0.31326) < 5e-6 && secs < 10.0;
  return {ok, fmt("max |loss - oracle| = %.3g over 50 trials; worked values %.5f (0.18017), %.5f (0.31326); %.2f s",
                  worst, worked, ce, secs)};
}

void check_param_gradients(const std::function<torch::Tensor()>& loss, const std::vector<torch::Tensor>& params,
                           std::vector<double>& analytic, std::vector<double>& numeric) {
  // Small step: LeakyReLU kinks within 1e-6 of a pre-activation otherwise corrupt single coordinates.
  constexpr double kStep = 1e-8;
  for (const auto& p : params) {
    if (p.grad().defined()) p.grad().zero_();
  }
  loss().backward();
  uint64_t seed = 0;
  for (const auto& p : params) {
    const auto coords = sample_coords(p.numel(), 6, ++seed);
    auto a = gather(p.grad().defined() ? p.grad() : torch::zeros_like(p), coords);
    auto n = numeric_gradient([&] { return loss().item<double>(); }, p, coords, kStep);
    analytic.insert(analytic.end(), a.begin(), a.end());
    numeric.insert(numeric.end(), n.begin(), n.end());
  }
}

Outcome gradient_checks() {
  const auto t0 = Clock::now();
  std::vector<std::string> parts;
  double worst_loss = 0.0;
  auto record = [&](const char* name, double err) {
    worst_loss = std::max(worst_loss, err);
    parts.push_back(fmt("%s %.2g", name, err));
  };
  {
    auto g = generator(1);
    auto pred = (torch::rand({2, 1, 4, 4}, g, f64()) * 10 + 0.5).requires_grad_(true);
    auto gt = torch::rand({2, 1, 4, 4}, g, f64()) * 10 + 0.5;
    auto valid = torch::rand({2, 1, 4, 4}, g, f64()) > 0.2;
    depth_scale_invariant_loss(pred, gt, valid, 0.5).backward();
    auto f = [&] { return depth_scale_invariant_loss(pred, gt, valid, 0.5).item<double>(); };
    const auto coords = sample_coords(pred.numel(), 32, 1);
    record("depth", relative_error(gather(pred.grad(), coords), numeric_gradient(f, pred, coords)));
  }
  {
    auto g = generator(2);
    auto logits = (torch::randn({2, 4, 4, 4}, g, f64()) * 2).requires_grad_(true);
    auto labels = torch::randint(0, 4, {2, 4, 4}, g, torch::kLong);
    segmentation_ce_loss(logits, labels, 255).backward();
    auto f = [&] { return segmentation_ce_loss(logits, labels, 255).item<double>(); };
    const auto coords = sample_coords(logits.numel(), 64, 2);
    record("ce", relative_error(gather(logits.grad(), coords), numeric_gradient(f, logits, coords)));
  }
  auto g = generator(3);
  auto critic = build_critic(3, g, 4);
  critic->to(torch::kDouble);
  CriticFn fn = [critic](const torch::Tensor& x) mutable { return critic->forward(x); };
  auto real = torch::rand({3, 3, 16, 16}, g, f64()), fake = torch::rand({3, 3, 16, 16}, g, f64());
  {
    std::vector<double> a, n;
    check_param_gradients([&] { auto gen = generator(9); return gradient_penalty(fn, real, fake, gen).penalty; },
                          critic->parameters(), a, n);
    record("gp", relative_error(a, n));
  }
  {
    std::vector<double> a, n;
    check_param_gradients([&] { auto gen = generator(10); return critic_loss(fn, real, fake, 10.0, gen); },
                          critic->parameters(), a, n);
    record("critic", relative_error(a, n));
  }
  {
    auto x = fake.clone().requires_grad_(true);
    generator_adversarial_loss(fn, x).backward();
    auto f = [&] { return generator_adversarial_loss(fn, x).item<double>(); };
    const auto coords = sample_coords(x.numel(), 48, 5);
    record("gen_adv", relative_error(gather(x.grad(), coords), numeric_gradient(f, x, coords)));
  }
  double model_err = 0.0;
  {
    NetConfig cfg;
    cfg.image_height = cfg.image_width = 32;
    cfg.num_classes = 3;
    cfg.embed_dim = 8;
    cfg.depths = {2, 2};
    cfg.heads = {1, 2};
    cfg.mlp_ratio = 2;
    cfg.decoder_channels = 8;
    auto gm = generator(6);
    auto net = build_network(cfg, gm);
    net->to(torch::kDouble);
    auto c2 = build_critic(1 + cfg.num_classes, gm, 4);
    c2->to(torch::kDouble);
    CriticFn fn2 = [c2](const torch::Tensor& x) mutable { return c2->forward(x); };
    auto images = torch::randn({2, 3, 32, 32}, gm, f64());
    auto gt = torch::rand({2, 1, 32, 32}, gm, f64()) * 20 + 0.5;
    auto valid = torch::ones({2, 1, 32, 32}, torch::kBool);
    auto labels = torch::randint(0, cfg.num_classes, {2, 32, 32}, gm, torch::kLong);
    LossWeights w;
    w.beta_adv = 0.1;
    auto loss = [&] {
      auto pred = net->forward(images);
      auto log_pred = pred.log_depth * std::log(800.0) + std::log(0.1);
      return total_loss(depth_scale_invariant_loss_from_logs(log_pred, gt.log(), valid, 0.5),
                        segmentation_ce_loss(pred.seg_logits, labels, 255),
                        generator_adversarial_loss(fn2, make_joint_map(pred.log_depth, pred.seg_logits)), w);
    };
    std::vector<torch::Tensor> params;
    for (const auto& item : net->named_parameters()) {
      const auto& name = item.key();
      for (const char* want : {"patch_embed.weight", "blocks.1.attn.qkv.weight", "blocks.3.fc1.weight",
                               "fuse.0.weight", "pixel_stem.weight", "depth_head.0.weight", "seg_head.2.weight"}) {
        if (name == want) params.push_back(item.value());
      }
    }
    std::vector<double> a, n;
    check_param_gradients(loss, params, a, n);
    model_err = relative_error(a, n);
    parts.push_back(fmt("model %.2g (%zu tensors)", model_err, params.size()));
  }
  const double secs = seconds_since(t0);
  std::string detail;
  for (const auto& p : parts) detail += p + "; ";
  detail += fmt("%.1f s", secs);
  return {worst_loss < 1e-4 && model_err < 1e-3 && secs < 120.0, "relative errors: " + detail};
}

Outcome scale_invariance() {
  auto g = generator(5);
  auto pred = torch::rand({2, 1, 4, 4}, g, f64()) * 10 + 0.1;
  auto gt = torch::rand({2, 1, 4, 4}, g, f64()) * 10 + 0.1;
  auto valid = torch::rand({2, 1, 4, 4}, g, f64()) > 0.1;
  const double base = depth_scale_invariant_loss(pred, gt, valid, 1.0).item<double>();
  double worst = 0.0;
  for (double s : {0.1, 1.0, 10.0}) {
    worst = std::max(worst, std::fabs(depth_scale_invariant_loss(pred * s, gt, valid, 1.0).item<double>() - base));
  }
  return {worst < 1e-9, fmt("max |delta| = %.3g for s in {0.1, 1, 10}", worst)};
}

Outcome log_depth_round_trip() {
  const DepthRange range{0.1, 80.0};
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(std::log(range.d_min), std::log(range.d_max));
  DepthMap d(1, 1000);
  for (int64_t i = 0; i < 1000; ++i) {
    d.values.data[i] = std::exp(u(rng));
    d.valid.data[i] = 1;
  }
  const auto back = from_log_depth(to_log_depth(d, range), range);
  double worst = 0.0;
  for (int64_t i = 0; i < 1000; ++i) {
    worst = std::max(worst, std::fabs(back.values.data[i] - d.values.data[i]) / d.values.data[i]);
  }
  DepthMap anchors(1, 3);
  anchors.values.data = {range.d_min, range.d_max, std::sqrt(range.d_min * range.d_max)};
  anchors.valid.data = {1, 1, 1};
  const auto enc = to_log_depth(anchors, range);
  const double anchor_err = std::max({std::fabs(enc.values.data[0]), std::fabs(enc.values.data[1] - 1.0),
                                      std::fabs(enc.values.data[2] - 0.5)});
  return {worst < 1e-6 && anchor_err < 1e-12,
          fmt("round-trip max relative error %.3g; anchor error %.3g", worst, anchor_err)};
}

Outcome gp_analytic() {
  auto g = generator(1);
  const int64_t d = 2 * 4 * 4;
  auto real = torch::rand({4, 2, 4, 4}, g, f64()), fake = torch::rand({4, 2, 4, 4}, g, f64());
  auto w = torch::randn({d}, g, f64());
  w = w / w.norm();
  CriticFn linear = [w](const torch::Tensor& x) { return (x.reshape({x.size(0), -1}) * w).sum(1, true); };
  CriticFn constant = [](const torch::Tensor& x) { return torch::full({x.size(0), 1}, 3.0, x.options()); };
  CriticFn scaled = [](const torch::Tensor& x) { return 3.0 * x.reshape({x.size(0), -1}).sum(1, true); };
  auto gen = generator(2);
  const double lin = gradient_penalty(linear, real, fake, gen).penalty.item<double>();
  const double con = gradient_penalty(constant, real, fake, gen).penalty.item<double>();
  const double sca = gradient_penalty(scaled, real, fake, gen).penalty.item<double>();
  const double expect = std::pow(3.0 * std::sqrt(static_cast<double>(d)) - 1.0, 2);
  const bool ok = std::fabs(lin) < 1e-10 && std::fabs(con - 1.0) < 1e-10 && std::fabs(sca - expect) < 1e-8;
  return {ok, fmt("linear %.3g, constant %.12g, scaled-sum %.10g (expect %.10g)", lin, con, sca, expect)};
}

Outcome metric_oracles() {
  const DepthRange range{0.1, 80.0};
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> depth(0.05, 90.0);
  std::bernoulli_distribution keep(0.85);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    DepthMap p(8, 8), g(8, 8);
    std::vector<double> pv, gv;
    std::vector<bool> valid;
    for (int64_t i = 0; i < 64; ++i) {
      p.values.data[i] = depth(rng);
      p.valid.data[i] = 1;
      g.values.data[i] = i == 0 ? 5.0 : depth(rng);
      g.valid.data[i] = i == 0 || keep(rng);
      if (!g.valid.data[i]) g.values.data[i] = 0.0;
      pv.push_back(p.values.data[i]);
      gv.push_back(g.values.data[i]);
      valid.push_back(g.valid.data[i]);
    }
    const auto m = depth_metrics(p, g, range);
    const auto o = oracle::depth_stats(pv, gv, valid, range.d_min, range.d_max);
    for (auto [a, b] : {std::pair{m.abs_rel, o.abs_rel}, {m.sq_rel, o.sq_rel}, {m.rmse, o.rmse},
                        {m.rmse_log, o.rmse_log}, {m.delta1, o.d1}, {m.delta2, o.d2}, {m.delta3, o.d3}}) {
      worst = std::max(worst, std::fabs(a - b));
    }
    Grid<int32_t> lp(8, 8), lg(8, 8);
    std::vector<int> vp, vg;
    for (int64_t i = 0; i < 64; ++i) {
      lp.data[i] = static_cast<int32_t>(rng() % 4);
      lg.data[i] = rng() % 10 == 0 ? 255 : static_cast<int32_t>(rng() % 4);
      if (i == 0) lg.data[i] = 0;
      vp.push_back(lp.data[i]);
      vg.push_back(lg.data[i]);
    }
    SegAccumulator acc(4, 255);
    acc.update(lp, lg);
    const auto s = miou(acc);
    worst = std::max(worst, std::fabs(s.miou - oracle::mean_iou(vp, vg, 4, 255)));
    worst = std::max(worst, std::fabs(s.pixel_acc - oracle::pixel_accuracy(vp, vg, 255)));
  }
  DepthMap p(1, 1), g(1, 1);
  p.values(0, 0) = 5.0;
  p.valid(0, 0) = 1;
  g.values(0, 0) = 4.0;
  g.valid(0, 0) = 1;
  const auto strict = depth_metrics(p, g, range);
  const bool strict_ok = strict.delta1 == 0.0 && strict.delta2 == 1.0;
  return {worst < 1e-10 && strict_ok,
          fmt("max |metric - oracle| = %.3g; g=4 p=5 gives delta1=%g delta2=%g", worst, strict.delta1, strict.delta2)};
}

using Tuple = std::tuple<float, float, float, double, uint8_t, int32_t>;

std::vector<Tuple> tuples(const std::vector<Sample>& batch) {
  std::vector<Tuple> out;
  for (const auto& s : batch) {
    for (int64_t r = 0; r < s.height(); ++r) {
      for (int64_t c = 0; c < s.width(); ++c) {
        out.emplace_back(s.image.at(r, c, 0), s.image.at(r, c, 1), s.image.at(r, c, 2), s.depth.values(r, c),
                         s.depth.valid(r, c), s.labels(r, c));
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Outcome mixup_conservation() {
  SyntheticSpec spec;
  spec.height = spec.width = 16;
  int conserved = 0, trials = 0, changed = 0;
  bool identity = true;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    std::vector<Sample> batch;
    for (int i = 0; i < 4; ++i) batch.push_back(render_scene(mix_seed(seed, i), spec, std::to_string(i)).sample);
    // Disjoint equal 4x4 tiles, permuted across the batch.
    PatchPlan plan;
    for (int i = 0; i < 4; ++i) {
      for (int k = 0; k < 4; ++k) plan.patches.push_back(Patch{i, 4 * k, 4 * ((k + i) % 4), 4});
    }
    plan.source.resize(plan.patches.size());
    std::iota(plan.source.begin(), plan.source.end(), size_t{0});
    Rng rng(seed);
    std::shuffle(plan.source.begin(), plan.source.end(), rng);
    auto mixed = batch;
    apply_patch_plan(mixed, plan);
    conserved += tuples(mixed) == tuples(batch);
    changed += !(mixed[0].labels == batch[0].labels && mixed[0].image == batch[0].image);
    ++trials;
    // Sampled plans with one equal-size patch per image.
    AugConfig one;
    one.n_patches = 1;
    one.min_frac = one.max_frac = 0.25;
    conserved += tuples(patch_mixup(batch, rng, one)) == tuples(batch);
    ++trials;
    AugConfig none;
    none.n_patches = 0;
    auto same = patch_mixup(batch, rng, none);
    for (size_t i = 0; i < batch.size(); ++i) {
      identity &= same[i].image == batch[i].image && same[i].labels == batch[i].labels &&
                  same[i].depth.values == batch[i].depth.values;
    }
  }
  return {conserved == trials && identity && changed > 0,
          fmt("%d/%d mixed batches conserve the tuple multiset; N=0 identity %s", conserved, trials,
              identity ? "holds" : "broken")};
}

// ---------------------------------------------------------------------------
// End-to-end runs on the default synthetic task.

struct Runs {
  fs::path work;
  Dataset data;
  RunConfig base;
  std::optional<TrainReport> main, repeat, linear;
  double main_abs_rel = NAN, main_miou = NAN;

  TrainReport run(const RunConfig& cfg, const std::string& name, const FitOptions& extra = {}) {
    FitOptions opts = extra;
    opts.out_dir = (work / name).string();
    if (extra.resume_from.empty()) fs::remove_all(opts.out_dir);
    std::fprintf(stderr, "[acceptance] training %s (%lld steps)\n", name.c_str(),
                 static_cast<long long>(cfg.train.total_steps));
    return fit(cfg, data, opts);
  }
  TrainReport& main_run() {
    if (!main) main = run(base, "default");
    return *main;
  }
};

const EvalReport& final_eval(const TrainReport& r) { return r.evals.back().second; }

Outcome end_to_end(Runs& runs) {
  auto& a = runs.main_run();
  runs.repeat = runs.run(runs.base, "default_repeat");
  const auto& ev = final_eval(a);
  const bool reproducible = a.digest == runs.repeat->digest && final_eval(*runs.repeat).depth.abs_rel == ev.depth.abs_rel;
  const bool ok = ev.seg.miou >= 0.60 && ev.depth.abs_rel <= 0.20 && reproducible && a.final_step == 2000 &&
                  a.wall_seconds <= 1200.0;
  return {ok, fmt("after %lld steps: mIoU %.4f (>= 0.60), AbsRel %.4f (<= 0.20); wall %.0f s; repeat digest %s",
                  static_cast<long long>(a.final_step), ev.seg.miou, ev.depth.abs_rel, a.wall_seconds,
                  reproducible ? "identical" : "DIFFERENT")};
}

Outcome ablation_directions(Runs& runs) {
  // (a) wiring: no critic vs. beta_adv = 0 with the critic still training.
  RunConfig none = runs.base, zero = runs.base;
  none.train.total_steps = zero.train.total_steps = 500;
  apply_ablation(none, "no-critic");
  zero.train.weights.beta_adv = 0.0;
  const auto rn = runs.run(none, "no_critic");
  const auto rz = runs.run(zero, "beta_zero");
  const bool bit_identical = rn.digest == rz.digest;
  // (b) log vs. linear depth space at the default length.
  auto& log_run = runs.main_run();
  RunConfig lin = runs.base;
  apply_ablation(lin, "linear");
  runs.linear = runs.run(lin, "linear");
  const double log_abs = final_eval(log_run).depth.abs_rel, lin_abs = final_eval(*runs.linear).depth.abs_rel;
  // (c) parameter overhead of the second head.
  RunConfig depth_only = runs.base;
  apply_ablation(depth_only, "only-depth");
  auto g1 = generator(0), g2 = generator(0);
  const auto dual = count_params(*build_network(resolve_net_config(runs.base, runs.data.manifest), g1));
  const auto single = count_params(*build_network(resolve_net_config(depth_only, runs.data.manifest), g2));
  const double ratio = static_cast<double>(dual) / static_cast<double>(single);
  return {bit_identical && log_abs <= lin_abs && ratio <= 1.05,
          fmt("(a) w/o Critic vs beta_adv=0 over 500 steps: %s; (b) AbsRel log %.4f vs linear %.4f; "
              "(c) params %lld / %lld = %.4f",
              bit_identical ? "bit-identical" : "DIFFERENT", log_abs, lin_abs, static_cast<long long>(dual),
              static_cast<long long>(single), ratio)};
}

Outcome gp_health(Runs& runs) {
  const auto& log = runs.main_run().log;
  double sum = 0.0;
  int n = 0;
  for (const auto& e : log) {
    if (e.step > 500 && e.step <= 550) {
      sum += e.loss.critic_grad_norm;
      ++n;
    }
  }
  const double mean = n ? sum / n : NAN;
  return {n == 50 && mean >= 0.5 && mean <= 1.5, fmt("mean critic gradient norm over steps 501-550: %.4f (%d steps)", mean, n)};
}

Outcome resume_determinism(Runs& runs) {
  auto& full = runs.main_run();
  const auto ckpt = runs.work / "resumed" / "checkpoints" / "step_001000";
  // Interrupted run: stop at 1000, then continue in the same directory.
  FitOptions first;
  first.stop_at = 1000;
  runs.run(runs.base, "resumed", first);
  FitOptions second;
  second.resume_from = ckpt.string();
  const auto resumed = runs.run(runs.base, "resumed", second);
  const bool same = resumed.digest == full.digest && resumed.final_step == full.final_step;
  return {same, fmt("resumed at 1000 -> %lld: digest %s vs uninterrupted %s", static_cast<long long>(resumed.final_step),
                    resumed.digest.c_str(), full.digest.c_str())};
}

}  // namespace
}  // namespace depthseg

int main(int argc, char** argv) {
  using namespace depthseg;
  fs::path work = fs::temp_directory_path() / "depthseg_acceptance";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--work" && i + 1 < argc) {
      work = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string item;
      while (std::getline(ss, item, ',')) only.insert(std::stoi(item));
    } else {
      std::fprintf(stderr, "usage: %s [--work DIR] [--only N,...]\n", argv[0]);
      return 2;
    }
  }
  configure_determinism(true);

  Runs runs;
  runs.work = work;
  auto need_runs = [&] {
    if (!runs.data.train.empty()) return;
    const auto root = (work / "data").string();
    fs::remove_all(root);
    SyntheticSpec spec;
    gen_synthetic(root, "train", 0, 500, spec);
    gen_synthetic(root, "val", 0, 100, spec);
    synthetic_manifest(spec, {"train", "val"}).save(root);
    runs.data = load_training_data(root);
  };

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {1, "loss oracles", loss_oracles},
      {2, "gradient checks", gradient_checks},
      {3, "scale invariance", scale_invariance},
      {4, "log-depth round trip and anchors", log_depth_round_trip},
      {5, "gradient penalty analytic cases", gp_analytic},
      {6, "metric oracles", metric_oracles},
      {7, "patch mixup conservation", mixup_conservation},
      {8, "end-to-end toy training", [&] { need_runs(); return end_to_end(runs); }},
      {9, "ablation directionality", [&] { need_runs(); return ablation_directions(runs); }},
      {10, "gradient penalty health", [&] { need_runs(); return gp_health(runs); }},
      {11, "resume determinism", [&] { need_runs(); return resume_determinism(runs); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %d: %s  %s: %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
