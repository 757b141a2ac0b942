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
#include "depthseg/training.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "depthseg/errors.hpp"

namespace fs = std::filesystem;

namespace depthseg {

namespace {

torch::Generator make_generator(uint64_t seed) { return at::detail::createCPUGenerator(seed); }

uint64_t tag(const char* name) { return hash_string(name); }

std::string step_name(int64_t step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "step_%06lld", static_cast<long long>(step));
  return buf;
}

bool has_depth(Tasks t) { return t != Tasks::SegOnly; }
bool has_seg(Tasks t) { return t != Tasks::DepthOnly; }

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DivergenceError(std::string("non-finite ") + what);
}

}  // namespace

Dataset load_training_data(const std::string& root, int64_t center_crop_size) {
  Dataset data;
  data.manifest = DatasetManifest::load(root);
  data.train = load_dataset(root, "train", data.manifest);
  if (fs::is_directory(fs::path(root) / "val")) data.val = load_dataset(root, "val", data.manifest);
  if (center_crop_size > 0) {
    if (center_crop_size > data.manifest.height || center_crop_size > data.manifest.width) {
      throw ConfigError("train.center_crop larger than the dataset frames");
    }
    for (auto* split : {&data.train, &data.val}) {
      for (auto& s : *split) s = center_crop(s, center_crop_size, center_crop_size);
    }
    data.manifest.height = center_crop_size;
    data.manifest.width = center_crop_size;
  }
  return data;
}

NetConfig resolve_net_config(const RunConfig& cfg, const DatasetManifest& manifest) {
  NetConfig net = cfg.net;
  net.num_classes = manifest.num_classes;
  net.image_height = manifest.height;
  net.image_width = manifest.width;
  net.validate();
  return net;
}

torch::Tensor encode_depth(const torch::Tensor& meters, const DepthRange& range, DepthSpace space) {
  auto m = meters.clamp(range.d_min, range.d_max);
  if (space == DepthSpace::Log) return ((m.log() - std::log(range.d_min)) / range.log_span()).clamp(0.0, 1.0);
  return m / range.d_max;
}

torch::Tensor log_meters_from_encoded(const torch::Tensor& encoded, const DepthRange& range, DepthSpace space) {
  if (space == DepthSpace::Log) return encoded * range.log_span() + std::log(range.d_min);
  return encoded.log() + std::log(range.d_max);
}

torch::Tensor meters_from_encoded(const torch::Tensor& encoded, const DepthRange& range, DepthSpace space) {
  if (space == DepthSpace::Log) return (encoded * range.log_span() + std::log(range.d_min)).exp();
  return encoded * range.d_max;
}

// ---------------------------------------------------------------------------
// Trainer

Trainer::Trainer(const RunConfig& cfg, const DatasetManifest& manifest) : cfg_(cfg), manifest_(manifest) {
  cfg_.validate();
  manifest_.validate();
  const NetConfig net_cfg = resolve_net_config(cfg_, manifest_);
  cfg_.net = net_cfg;
  auto gen = make_generator(mix_seed(cfg_.train.seed, tag("generator")));
  net_ = build_network(net_cfg, gen);

  const int64_t k = net_cfg.num_classes;
  std::vector<int64_t> critic_inputs;
  if (cfg_.train.critic == CriticMode::One) {
    critic_inputs.push_back((has_depth(net_cfg.tasks) ? 1 : 0) + (has_seg(net_cfg.tasks) ? k : 0));
  } else if (cfg_.train.critic == CriticMode::Two) {
    if (has_depth(net_cfg.tasks)) critic_inputs.push_back(1 + net_cfg.in_channels);
    if (has_seg(net_cfg.tasks)) critic_inputs.push_back(k + net_cfg.in_channels);
  }
  std::vector<torch::Tensor> critic_params;
  for (size_t i = 0; i < critic_inputs.size(); ++i) {
    auto cgen = make_generator(mix_seed(cfg_.train.seed, tag("critic"), i));
    critics_.push_back(build_critic(critic_inputs[i], cgen, cfg_.train.critic_channels));
    for (auto& p : critics_.back()->parameters()) critic_params.push_back(p);
  }

  gen_opt_ = std::make_unique<torch::optim::AdamW>(
      net_->parameters(), torch::optim::AdamWOptions(cfg_.train.base_lr).weight_decay(cfg_.train.weight_decay));
  if (!critic_params.empty()) {
    critic_opt_ = std::make_unique<torch::optim::AdamW>(
        critic_params, torch::optim::AdamWOptions(cfg_.train.critic_lr).betas({0.5, 0.9}).weight_decay(0.0));
  }
}

LossWeights Trainer::effective_weights() const {
  LossWeights w = cfg_.train.weights;
  if (cfg_.train.critic == CriticMode::None) w.beta_adv = 0.0;
  if (cfg_.net.tasks == Tasks::DepthOnly) w.alpha_mix = 1.0;
  if (cfg_.net.tasks == Tasks::SegOnly) w.alpha_mix = 0.0;
  return w;
}

std::vector<Sample> Trainer::batch_for_step(const std::vector<Sample>& train, int64_t s) const {
  if (train.empty()) throw DataError("training split is empty");
  const auto n = static_cast<int64_t>(train.size());
  const int64_t b = cfg_.train.batch_size;
  std::vector<Sample> batch;
  batch.reserve(static_cast<size_t>(b));
  int64_t cached_epoch = -1;
  std::vector<size_t> order(static_cast<size_t>(n));
  for (int64_t j = 0; j < b; ++j) {
    const int64_t index = s * b + j;
    const int64_t epoch = index / n;
    if (epoch != cached_epoch) {
      std::iota(order.begin(), order.end(), size_t{0});
      Rng rng(mix_seed(cfg_.train.seed, tag("epoch"), static_cast<uint64_t>(epoch)));
      std::shuffle(order.begin(), order.end(), rng);
      cached_epoch = epoch;
    }
    batch.push_back(train[order[static_cast<size_t>(index % n)]]);
  }
  if (cfg_.train.augment) {
    Rng rng(mix_seed(cfg_.train.seed, tag("augment"), static_cast<uint64_t>(s)));
    batch = augment_batch(std::move(batch), rng, cfg_.aug);
  }
  return batch;
}

TensorBatch Trainer::to_tensors(const std::vector<Sample>& samples) const {
  return make_batch(samples, manifest_, torch::kFloat);
}

std::vector<torch::Tensor> Trainer::fake_maps(const Predictions& pred, const torch::Tensor& images) const {
  std::vector<torch::Tensor> maps;
  if (cfg_.train.critic == CriticMode::One) {
    std::vector<torch::Tensor> parts;
    if (pred.log_depth.defined()) parts.push_back(pred.log_depth);
    if (pred.seg_logits.defined()) parts.push_back(torch::softmax(pred.seg_logits, 1));
    maps.push_back(torch::cat(parts, 1));
  } else if (cfg_.train.critic == CriticMode::Two) {
    if (pred.log_depth.defined()) maps.push_back(torch::cat({pred.log_depth, images}, 1));
    if (pred.seg_logits.defined()) maps.push_back(torch::cat({torch::softmax(pred.seg_logits, 1), images}, 1));
  }
  return maps;
}

std::vector<torch::Tensor> Trainer::real_maps(const TensorBatch& batch, const std::vector<torch::Tensor>& fake) const {
  // Pixels without ground truth (invalid depth, ignored labels) take the fake
  // values so the critic cannot score them.
  const bool depth = has_depth(cfg_.net.tasks), seg = has_seg(cfg_.net.tasks);
  const auto k = static_cast<int64_t>(manifest_.num_classes);
  torch::Tensor gt_depth, gt_seg, scored;
  if (depth) gt_depth = encode_depth(batch.depth, manifest_.range, cfg_.train.depth_space);
  if (seg) {
    gt_seg = make_joint_map_from_labels(torch::zeros_like(batch.depth), batch.labels, k, manifest_.ignore_id, &scored)
                 .narrow(1, 1, k);
    scored = scored.to(torch::kBool);
  }
  std::vector<torch::Tensor> maps;
  auto fill = [](const torch::Tensor& real, const torch::Tensor& mask, const torch::Tensor& fake_part) {
    return torch::where(mask, real, fake_part.detach());
  };
  if (cfg_.train.critic == CriticMode::One) {
    const auto& f = fake.at(0);
    std::vector<torch::Tensor> parts;
    int64_t c = 0;
    if (depth) {
      parts.push_back(fill(gt_depth, batch.valid, f.narrow(1, 0, 1)));
      c = 1;
    }
    if (seg) parts.push_back(fill(gt_seg, scored, f.narrow(1, c, k)));
    maps.push_back(torch::cat(parts, 1));
  } else if (cfg_.train.critic == CriticMode::Two) {
    size_t i = 0;
    if (depth) {
      const auto& f = fake.at(i++);
      maps.push_back(torch::cat({fill(gt_depth, batch.valid, f.narrow(1, 0, 1)), batch.images}, 1));
    }
    if (seg) {
      const auto& f = fake.at(i++);
      maps.push_back(torch::cat({fill(gt_seg, scored, f.narrow(1, 0, k)), batch.images}, 1));
    }
  }
  return maps;
}

CriticStepStats Trainer::train_critic_step(const TensorBatch& batch, const std::vector<torch::Tensor>& fake,
                                           torch::Generator& gen) {
  CriticStepStats stats;
  if (critics_.empty()) return stats;
  const auto real = real_maps(batch, fake);
  critic_opt_->zero_grad();
  torch::Tensor loss = torch::zeros({}, batch.images.options());
  std::vector<torch::Tensor> params;
  for (size_t i = 0; i < critics_.size(); ++i) {
    Critic critic = critics_[i];
    PenaltyTerms terms;
    loss = loss + critic_loss([critic](const torch::Tensor& x) mutable { return critic->forward(x); }, real[i], fake[i],
                              cfg_.train.weights.lambda_gp, gen, &terms);
    stats.gp += terms.penalty.item<double>();
    stats.grad_norm += terms.mean_grad_norm.item<double>() / static_cast<double>(critics_.size());
    stats.real_score += terms.real_score.item<double>();
    stats.fake_score += terms.fake_score.item<double>();
    for (auto& p : critic->parameters()) params.push_back(p);
  }
  stats.loss = loss.item<double>();
  check_finite(stats.loss, "critic loss");
  torch::autograd::backward({loss}, {}, false, false, params);
  critic_opt_->step();
  return stats;
}

LossReport Trainer::train_generator_step(const TensorBatch& batch, double lr) {
  const LossWeights w = effective_weights();
  net_->train();
  Predictions pred = net_->forward(batch.images);
  auto zero = torch::zeros({}, batch.images.options());

  torch::Tensor l_depth = zero, l_seg = zero, l_adv = zero;
  if (pred.log_depth.defined()) {
    auto log_pred = log_meters_from_encoded(pred.log_depth, manifest_.range, cfg_.train.depth_space);
    auto log_gt = torch::where(batch.valid, batch.depth, torch::ones_like(batch.depth)).log();
    l_depth = depth_scale_invariant_loss_from_logs(log_pred, log_gt, batch.valid, w.alpha_si);
  }
  if (pred.seg_logits.defined()) l_seg = segmentation_ce_loss(pred.seg_logits, batch.labels, manifest_.ignore_id);

  double adv_value = 0.0;
  if (!critics_.empty()) {
    // The adversarial term enters the graph only when it carries weight, so a
    // zero weight leaves the generator update bit-identical to a critic-free run.
    auto adv_of = [&](const std::vector<torch::Tensor>& maps) {
      torch::Tensor sum = zero;
      for (size_t i = 0; i < critics_.size(); ++i) {
        Critic critic = critics_[i];
        sum = sum + generator_adversarial_loss([critic](const torch::Tensor& x) mutable { return critic->forward(x); }, maps[i]);
      }
      return sum;
    };
    if (w.beta_adv != 0.0) {
      l_adv = adv_of(fake_maps(pred, batch.images));
    } else {
      torch::NoGradGuard no_grad;
      Predictions detached{pred.log_depth.defined() ? pred.log_depth.detach() : torch::Tensor(),
                           pred.seg_logits.defined() ? pred.seg_logits.detach() : torch::Tensor()};
      adv_value = adv_of(fake_maps(detached, batch.images)).item<double>();
    }
  }

  torch::Tensor total = w.beta_adv != 0.0 ? total_loss(l_depth, l_seg, l_adv, w) : total_loss(l_depth, l_seg, zero, w);
  LossReport report;
  report.l_depth = l_depth.item<double>();
  report.l_seg = l_seg.item<double>();
  report.l_gen_adv = w.beta_adv != 0.0 ? l_adv.item<double>() : adv_value;
  check_finite(report.l_gen_adv, "adversarial loss");
  report.l_total = total_loss(report.l_depth, report.l_seg, report.l_gen_adv, w);

  for (auto& group : gen_opt_->param_groups()) static_cast<torch::optim::AdamWOptions&>(group.options()).lr(lr);
  gen_opt_->zero_grad();
  torch::autograd::backward({total}, {}, false, false, net_->parameters());
  gen_opt_->step();
  return report;
}

LogEntry Trainer::train_step(const std::vector<Sample>& train) {
  const int64_t s = step_;
  const TensorBatch batch = to_tensors(batch_for_step(train, s));
  LogEntry entry;
  if (!critics_.empty()) {
    // The generator is frozen during the critic steps, so one fake batch serves all of them.
    std::vector<torch::Tensor> fake;
    {
      torch::NoGradGuard no_grad;
      net_->train();
      fake = fake_maps(net_->forward(batch.images), batch.images);
    }
    double loss = 0.0, gp = 0.0, norm = 0.0;
    const int64_t n = cfg_.train.critic_steps;
    for (int64_t k = 0; k < n; ++k) {
      auto gen = make_generator(mix_seed(cfg_.train.seed, tag("gp"), static_cast<uint64_t>(s), static_cast<uint64_t>(k)));
      const CriticStepStats stats = train_critic_step(batch, fake, gen);
      loss += stats.loss / static_cast<double>(n);
      gp += stats.gp / static_cast<double>(n);
      norm += stats.grad_norm / static_cast<double>(n);
    }
    entry.loss.l_critic = loss;
    entry.loss.gp = gp;
    entry.loss.critic_grad_norm = norm;
  }
  entry.lr = poly_lr(cfg_.train.base_lr, s, cfg_.train.total_steps, cfg_.train.poly_power);
  const LossReport gen = train_generator_step(batch, entry.lr);
  entry.loss.l_depth = gen.l_depth;
  entry.loss.l_seg = gen.l_seg;
  entry.loss.l_gen_adv = gen.l_gen_adv;
  entry.loss.l_total = gen.l_total;
  ++step_;
  entry.step = step_;
  return entry;
}

// ---------------------------------------------------------------------------
// Log records

std::string format_log_record(const LogEntry& e) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "step=%lld lr=%.17g l_depth=%.17g l_seg=%.17g l_gen_adv=%.17g l_critic=%.17g gp=%.17g "
                "l_total=%.17g critic_grad_norm=%.17g",
                static_cast<long long>(e.step), e.lr, e.loss.l_depth, e.loss.l_seg, e.loss.l_gen_adv, e.loss.l_critic,
                e.loss.gp, e.loss.l_total, e.loss.critic_grad_norm);
  return buf;
}

LogEntry parse_log_record(const std::string& line) {
  LogEntry e;
  std::istringstream in(line);
  std::string token;
  int seen = 0;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw DataError("log record: malformed field '" + token + "'");
    const std::string key = token.substr(0, eq), value = token.substr(eq + 1);
    ++seen;
    if (key == "step") {
      e.step = parse_int(key, value);
    } else {
      const double v = parse_double(key, value);
      if (key == "lr") e.lr = v;
      else if (key == "l_depth") e.loss.l_depth = v;
      else if (key == "l_seg") e.loss.l_seg = v;
      else if (key == "l_gen_adv") e.loss.l_gen_adv = v;
      else if (key == "l_critic") e.loss.l_critic = v;
      else if (key == "gp") e.loss.gp = v;
      else if (key == "l_total") e.loss.l_total = v;
      else if (key == "critic_grad_norm") e.loss.critic_grad_norm = v;
      else throw DataError("log record: unknown field '" + key + "'");
    }
  }
  if (seen == 0) throw DataError("log record: empty line");
  return e;
}

std::vector<LogEntry> read_log_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open log records: " + path);
  std::vector<LogEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_log_record(line));
  }
  return out;
}

// ---------------------------------------------------------------------------
// fit

void configure_determinism(bool deterministic) {
  if (deterministic) {
    torch::set_num_threads(1);
    at::globalContext().setDeterministicAlgorithms(true, false);
  }
}

TrainReport fit(const RunConfig& cfg, const Dataset& data, const FitOptions& options) {
  const auto start_time = std::chrono::steady_clock::now();
  configure_determinism(cfg.train.deterministic);
  Trainer trainer(cfg, data.manifest);
  if (!options.resume_from.empty()) trainer.load_checkpoint(options.resume_from);
  const RunConfig& run = trainer.config();
  const int64_t total = run.train.total_steps;
  const int64_t end = std::min(total, options.stop_at.value_or(total));
  if (trainer.step() > total) throw ConfigError("checkpoint step exceeds train.total_steps");
  if (trainer.step() < end && data.train.empty()) throw DataError("training split is empty");

  TrainReport report;
  report.seed = run.train.seed;
  const bool write = !options.out_dir.empty();
  const fs::path out(options.out_dir);
  std::ofstream log;
  if (write) {
    fs::create_directories(out / "checkpoints");
    fs::create_directories(out / "eval");
    KeyValues snapshot = run.to_key_values();
    std::ofstream(out / "config.snapshot") << "# data: " << data.manifest.root << "\n" << format_key_values(snapshot);
    // Resuming keeps the records up to the checkpoint and drops the rest.
    std::vector<std::string> kept;
    const fs::path log_path = out / "log.records";
    if (trainer.step() > 0 && fs::exists(log_path)) {
      for (const auto& e : read_log_records(log_path.string())) {
        if (e.step <= trainer.step()) kept.push_back(format_log_record(e));
      }
    }
    log.open(log_path, std::ios::trunc);
    for (const auto& line : kept) log << line << "\n";
    log.flush();
  }

  KeyValues last_metrics;
  auto run_eval = [&](int64_t step) {
    if (data.val.empty()) return;
    EvalReport ev = evaluate(trainer.net(), data.val, trainer.manifest(), run.train.depth_space,
                             run.train.eval_batch_size);
    last_metrics = eval_report_records(ev);
    if (write) write_eval_report((out / "eval" / (step_name(step) + ".report")).string(), ev);
    report.evals.emplace_back(step, ev);
  };
  auto checkpoint = [&](int64_t step) {
    if (!write) return;
    const auto path = (out / "checkpoints" / step_name(step)).string();
    trainer.save_checkpoint(path, last_metrics);
    report.final_checkpoint = path;
  };

  const int64_t eval_every = run.train.eval_interval;
  const int64_t ckpt_every = run.train.checkpoint_interval;
  if (trainer.step() == 0) run_eval(0);
  while (trainer.step() < end) {
    const LogEntry entry = trainer.train_step(data.train);
    if (write) log << format_log_record(entry) << "\n" << std::flush;
    report.log.push_back(entry);
    if (options.on_step) options.on_step(entry);
    const int64_t s = entry.step;
    const bool final_step = s == total;
    if ((eval_every > 0 && s % eval_every == 0) || final_step) run_eval(s);
    if ((ckpt_every > 0 && s % ckpt_every == 0) || final_step || s == end) checkpoint(s);
  }
  if (total == 0 && write) checkpoint(0);
  report.final_step = trainer.step();
  report.digest = parameter_digest(*trainer.net());
  report.params = count_params(*trainer.net());
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
  return report;
}

}  // namespace depthseg
