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
#include <functional>
#include <string>

#include "depthseg/errors.hpp"
#include "depthseg/training.hpp"

namespace depthseg {

void TrainConfig::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(base_lr)) throw ConfigError("train.base_lr must be > 0");
  if (!positive(critic_lr)) throw ConfigError("train.critic_lr must be > 0");
  if (!std::isfinite(weight_decay) || weight_decay < 0.0) throw ConfigError("train.weight_decay must be >= 0");
  if (!positive(poly_power)) throw ConfigError("train.poly_power must be > 0");
  if (total_steps < 0) throw ConfigError("train.total_steps must be >= 0");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (critic_steps < 1) throw ConfigError("train.critic_steps must be >= 1");
  if (critic_channels < 1) throw ConfigError("train.critic_channels must be >= 1");
  if (checkpoint_interval < 0) throw ConfigError("train.checkpoint_interval must be >= 0");
  if (eval_interval < 0) throw ConfigError("train.eval_interval must be >= 0");
  if (eval_batch_size < 1) throw ConfigError("train.eval_batch_size must be >= 1");
  if (center_crop < 0) throw ConfigError("train.center_crop must be >= 0");
  weights.validate();
}

void RunConfig::validate() const {
  train.validate();
  aug.validate();
}

namespace {

struct Field {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string& key, const std::string& value)> set;
};

std::string join_ints(const std::vector<int64_t>& v) {
  std::string s;
  for (auto x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
  return s;
}

std::vector<int64_t> parse_ints(const std::string& key, const std::string& value) {
  std::vector<int64_t> out;
  for (const auto& item : split_list(value)) out.push_back(parse_int(key, item));
  return out;
}

template <typename T>
std::string enum_name(T v, std::initializer_list<std::pair<T, const char*>> names) {
  for (const auto& [e, n] : names) {
    if (e == v) return n;
  }
  return "?";
}

template <typename T>
T enum_value(const std::string& key, const std::string& value, std::initializer_list<std::pair<T, const char*>> names) {
  std::string options;
  for (const auto& [e, n] : names) {
    if (value == n) return e;
    options += (options.empty() ? "" : "/") + std::string(n);
  }
  throw ConfigError("config key '" + key + "': expected one of " + options + ", got '" + value + "'");
}

#define DS_INT(key, member)                                                                     {key, {[](const RunConfig& c) { return std::to_string(c.member); },                                 [](RunConfig& c, const std::string& k, const std::string& v) { c.member = parse_int(k, v); }}}
#define DS_DOUBLE(key, member)                                                                  {key, {[](const RunConfig& c) { return format_double(c.member); },                                   [](RunConfig& c, const std::string& k, const std::string& v) { c.member = parse_double(k, v); }}}
#define DS_BOOL(key, member)                                                                    {key, {[](const RunConfig& c) { return std::string(c.member ? "true" : "false"); },                  [](RunConfig& c, const std::string& k, const std::string& v) { c.member = parse_bool(k, v); }}}

const std::initializer_list<std::pair<Tasks, const char*>> kTasks{
    {Tasks::Both, "both"}, {Tasks::DepthOnly, "depth"}, {Tasks::SegOnly, "seg"}};
const std::initializer_list<std::pair<CriticMode, const char*>> kCritic{
    {CriticMode::None, "none"}, {CriticMode::One, "one"}, {CriticMode::Two, "two"}};
const std::initializer_list<std::pair<DepthSpace, const char*>> kSpace{
    {DepthSpace::Log, "log"}, {DepthSpace::Linear, "linear"}};
const std::initializer_list<std::pair<MixupMode, const char*>> kMixup{
    {MixupMode::CrossImage, "cross"}, {MixupMode::SameImage, "same"}};

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table{
      DS_INT("model.patch_size", net.patch_size),
      DS_INT("model.window_size", net.window_size),
      DS_INT("model.embed_dim", net.embed_dim),
      DS_INT("model.mlp_ratio", net.mlp_ratio),
      DS_INT("model.decoder_channels", net.decoder_channels),
      {"model.depths", {[](const RunConfig& c) { return join_ints(c.net.depths); },
                        [](RunConfig& c, const std::string& k, const std::string& v) { c.net.depths = parse_ints(k, v); }}},
      {"model.heads", {[](const RunConfig& c) { return join_ints(c.net.heads); },
                       [](RunConfig& c, const std::string& k, const std::string& v) { c.net.heads = parse_ints(k, v); }}},
      {"train.tasks", {[](const RunConfig& c) { return enum_name(c.net.tasks, kTasks); },
                       [](RunConfig& c, const std::string& k, const std::string& v) { c.net.tasks = enum_value(k, v, kTasks); }}},
      {"train.critic", {[](const RunConfig& c) { return enum_name(c.train.critic, kCritic); },
                        [](RunConfig& c, const std::string& k, const std::string& v) { c.train.critic = enum_value(k, v, kCritic); }}},
      {"train.depth_space",
       {[](const RunConfig& c) { return enum_name(c.train.depth_space, kSpace); },
        [](RunConfig& c, const std::string& k, const std::string& v) { c.train.depth_space = enum_value(k, v, kSpace); }}},
      DS_BOOL("train.augment", train.augment),
      DS_BOOL("train.deterministic", train.deterministic),
      DS_INT("train.total_steps", train.total_steps),
      DS_INT("train.batch_size", train.batch_size),
      DS_INT("train.critic_steps", train.critic_steps),
      DS_INT("train.critic_channels", train.critic_channels),
      DS_DOUBLE("train.base_lr", train.base_lr),
      DS_DOUBLE("train.weight_decay", train.weight_decay),
      DS_DOUBLE("train.poly_power", train.poly_power),
      DS_DOUBLE("train.critic_lr", train.critic_lr),
      {"train.seed", {[](const RunConfig& c) { return std::to_string(c.train.seed); },
                      [](RunConfig& c, const std::string& k, const std::string& v) {
                        const long long s = parse_int(k, v);
                        if (s < 0) throw ConfigError("config key 'train.seed' must be >= 0");
                        c.train.seed = static_cast<uint64_t>(s);
                      }}},
      DS_INT("train.checkpoint_interval", train.checkpoint_interval),
      DS_INT("train.eval_interval", train.eval_interval),
      DS_INT("train.eval_batch_size", train.eval_batch_size),
      DS_INT("train.center_crop", train.center_crop),
      DS_DOUBLE("loss.alpha_si", train.weights.alpha_si),
      DS_DOUBLE("loss.alpha_mix", train.weights.alpha_mix),
      DS_DOUBLE("loss.beta_adv", train.weights.beta_adv),
      DS_DOUBLE("loss.lambda_gp", train.weights.lambda_gp),
      {"aug.n_patches", {[](const RunConfig& c) { return std::to_string(c.aug.n_patches); },
                         [](RunConfig& c, const std::string& k, const std::string& v) {
                           c.aug.n_patches = static_cast<int>(parse_int(k, v));
                         }}},
      DS_DOUBLE("aug.min_frac", aug.min_frac),
      DS_DOUBLE("aug.max_frac", aug.max_frac),
      DS_DOUBLE("aug.brightness", aug.brightness),
      DS_DOUBLE("aug.contrast", aug.contrast),
      DS_DOUBLE("aug.gamma", aug.gamma),
      DS_DOUBLE("aug.hue", aug.hue),
      DS_DOUBLE("aug.saturation", aug.saturation),
      DS_DOUBLE("aug.value", aug.value),
      DS_DOUBLE("aug.flip_prob", aug.flip_prob),
      DS_DOUBLE("aug.mixup_prob", aug.mixup_prob),
      {"aug.mixup_mode", {[](const RunConfig& c) { return enum_name(c.aug.mixup_mode, kMixup); },
                          [](RunConfig& c, const std::string& k, const std::string& v) {
                            c.aug.mixup_mode = enum_value(k, v, kMixup);
                          }}},
  };
  return table;
}

#undef DS_INT
#undef DS_DOUBLE
#undef DS_BOOL

}  // namespace

KeyValues RunConfig::to_key_values() const {
  KeyValues kv;
  for (const auto& [key, field] : fields()) kv[key] = field.get(*this);
  return kv;
}

void RunConfig::apply(const KeyValues& overrides) {
  std::string unknown;
  for (const auto& [key, value] : overrides) {
    if (!fields().count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
  }
  if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
  for (const auto& [key, value] : overrides) fields().at(key).set(*this, key, value);
  validate();
}

RunConfig RunConfig::from_key_values(const KeyValues& kv, bool require_loss_keys) {
  RunConfig cfg;
  if (require_loss_keys) {
    std::string missing;
    for (const char* key : {"loss.alpha_si", "loss.alpha_mix", "loss.beta_adv", "loss.lambda_gp"}) {
      if (!kv.count(key)) missing += (missing.empty() ? "" : ", ") + std::string(key);
    }
    if (!missing.empty()) throw ConfigError("missing mandatory config keys: " + missing);
  }
  cfg.apply(kv);
  return cfg;
}

const std::vector<std::string>& ablation_names() {
  static const std::vector<std::string> names{"only-depth", "only-seg", "no-critic", "one-critic",
                                              "two-critics", "linear", "log"};
  return names;
}

std::string ablation_label(const std::string& name) {
  static const std::map<std::string, std::string> labels{
      {"only-depth", "only Depth"},  {"only-seg", "only Seg"},         {"no-critic", "w/o Critic"},
      {"one-critic", "w one Critic"}, {"two-critics", "w two Critics"}, {"linear", "Linear Space"},
      {"log", "Log Space"}};
  auto it = labels.find(name);
  if (it == labels.end()) throw ConfigError("unknown ablation '" + name + "'");
  return it->second;
}

void apply_ablation(RunConfig& cfg, const std::string& name) {
  ablation_label(name);  // validates the name
  if (name == "only-depth") {
    cfg.net.tasks = Tasks::DepthOnly;
    cfg.train.weights.alpha_mix = 1.0;
  } else if (name == "only-seg") {
    cfg.net.tasks = Tasks::SegOnly;
    cfg.train.weights.alpha_mix = 0.0;
  } else if (name == "no-critic") {
    cfg.train.critic = CriticMode::None;
    cfg.train.weights.beta_adv = 0.0;
  } else if (name == "one-critic") {
    cfg.train.critic = CriticMode::One;
  } else if (name == "two-critics") {
    cfg.train.critic = CriticMode::Two;
  } else if (name == "linear") {
    cfg.train.depth_space = DepthSpace::Linear;
  } else if (name == "log") {
    cfg.train.depth_space = DepthSpace::Log;
  }
}

double poly_lr(double base, int64_t step, int64_t total, double power) {
  if (total <= 0 || step >= total) return 0.0;
  if (step <= 0) return base;
  return base * std::pow(1.0 - static_cast<double>(step) / static_cast<double>(total), power);
}

}  // namespace depthseg
