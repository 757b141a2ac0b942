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
#include <gtest/gtest.h>

#include <cmath>

#include "depthseg/config.hpp"
#include "depthseg/errors.hpp"
#include "depthseg/training.hpp"

namespace depthseg {
namespace {

KeyValues loss_keys() {
  return {{"loss.alpha_si", "0.5"}, {"loss.alpha_mix", "0.5"}, {"loss.beta_adv", "0.01"}, {"loss.lambda_gp", "10"}};
}

TEST(KeyValueFile, ParsesCommentsAndWhitespace) {
  auto kv = parse_key_values("# header\n a = 1 \n\nb=two # trailing\n");
  EXPECT_EQ(kv, (KeyValues{{"a", "1"}, {"b", "two"}}));
  EXPECT_EQ(parse_key_values(format_key_values(kv)), kv);
  EXPECT_THROW(parse_key_values("a = 1\na = 2\n"), ConfigError);
  EXPECT_THROW(parse_key_values("just words\n"), ConfigError);
  EXPECT_THROW(parse_key_values(" = 3\n"), ConfigError);
}

TEST(KeyValueFile, TypedAccessorsNameTheKey) {
  EXPECT_EQ(parse_int("k", "42"), 42);
  EXPECT_DOUBLE_EQ(parse_double("k", "2.5e-3"), 2.5e-3);
  EXPECT_TRUE(parse_bool("k", "on"));
  EXPECT_FALSE(parse_bool("k", "false"));
  try {
    parse_int("train.batch_size", "4.5");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("train.batch_size"), std::string::npos);
  }
  EXPECT_THROW(parse_double("k", "1.0x"), ConfigError);
  EXPECT_THROW(parse_bool("k", "maybe"), ConfigError);
  EXPECT_EQ(split_list("2, 2,2"), (std::vector<std::string>{"2", "2", "2"}));
  EXPECT_TRUE(split_list(" ").empty());
}

TEST(KeyValueFile, DoublesRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 5e-4, 1e300, -2.5}) EXPECT_EQ(parse_double("k", format_double(v)), v);
}

TEST(KeyValueFile, PadsByDisplayWidth) {
  EXPECT_EQ(pad_right("ab", 4), "ab  ");
  EXPECT_EQ(pad_right("δ<1.25 ↑", 10), "δ<1.25 ↑  ");
  EXPECT_EQ(pad_right("abcdef", 3), "abcdef");
}

TEST(RunConfig, RoundTripsThroughKeyValues) {
  RunConfig cfg;
  cfg.net.embed_dim = 24;
  cfg.net.depths = {1, 2, 1};
  cfg.train.base_lr = 1e-3;
  cfg.train.critic = CriticMode::Two;
  cfg.train.depth_space = DepthSpace::Linear;
  cfg.aug.mixup_mode = MixupMode::SameImage;
  cfg.train.weights.beta_adv = 0.25;
  auto kv = cfg.to_key_values();
  auto back = RunConfig::from_key_values(kv);
  EXPECT_EQ(back.to_key_values(), kv);
  EXPECT_EQ(back.net.depths, cfg.net.depths);
  EXPECT_EQ(back.train.critic, CriticMode::Two);
  EXPECT_EQ(back.train.weights.beta_adv, 0.25);
}

TEST(RunConfig, LossKeysAreMandatory) {
  KeyValues kv = loss_keys();
  EXPECT_NO_THROW(RunConfig::from_key_values(kv));
  kv.erase("loss.beta_adv");
  try {
    RunConfig::from_key_values(kv);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("loss.beta_adv"), std::string::npos);
  }
  EXPECT_NO_THROW(RunConfig::from_key_values(kv, false));
}

TEST(RunConfig, UnknownKeysAreListedByName) {
  KeyValues kv = loss_keys();
  kv["train.bogus"] = "1";
  kv["model.nope"] = "2";
  try {
    RunConfig::from_key_values(kv);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("train.bogus"), std::string::npos);
    EXPECT_NE(msg.find("model.nope"), std::string::npos);
  }
  RunConfig cfg;
  EXPECT_THROW(cfg.apply({{"train.nonsense", "1"}}), ConfigError);
  EXPECT_THROW(cfg.apply({{"train.critic", "three"}}), ConfigError);
  EXPECT_THROW(cfg.apply({{"train.batch_size", "0"}}), ConfigError);
}

TEST(RunConfig, OverridesWin) {
  RunConfig cfg = RunConfig::from_key_values(loss_keys());
  cfg.apply({{"train.total_steps", "17"}, {"loss.alpha_mix", "0.75"}, {"model.heads", "2,4,8"}});
  EXPECT_EQ(cfg.train.total_steps, 17);
  EXPECT_EQ(cfg.train.weights.alpha_mix, 0.75);
  EXPECT_EQ(cfg.net.heads, (std::vector<int64_t>{2, 4, 8}));
}

TEST(RunConfig, ValidationRejectsBadValues) {
  RunConfig cfg;
  cfg.train.base_lr = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = RunConfig{};
  cfg.train.critic_steps = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = RunConfig{};
  cfg.train.weights.alpha_mix = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Ablations, SevenRowsWithLabels) {
  const auto& names = ablation_names();
  ASSERT_EQ(names.size(), 7u);
  EXPECT_EQ(ablation_label("no-critic"), "w/o Critic");
  EXPECT_EQ(ablation_label("log"), "Log Space");
  EXPECT_THROW(ablation_label("three-critics"), ConfigError);
}

TEST(Ablations, SwitchesTheRightFields) {
  RunConfig base;
  auto cfg = base;
  apply_ablation(cfg, "only-depth");
  EXPECT_EQ(cfg.net.tasks, Tasks::DepthOnly);
  EXPECT_EQ(cfg.train.weights.alpha_mix, 1.0);
  EXPECT_EQ(cfg.to_key_values().at("loss.alpha_mix"), "1");
  cfg = base;
  apply_ablation(cfg, "only-seg");
  EXPECT_EQ(cfg.net.tasks, Tasks::SegOnly);
  EXPECT_EQ(cfg.train.weights.alpha_mix, 0.0);
  cfg = base;
  apply_ablation(cfg, "no-critic");
  EXPECT_EQ(cfg.train.critic, CriticMode::None);
  EXPECT_EQ(cfg.train.weights.beta_adv, 0.0);
  cfg = base;
  apply_ablation(cfg, "linear");
  EXPECT_EQ(cfg.train.depth_space, DepthSpace::Linear);
  cfg = base;
  apply_ablation(cfg, "log");
  EXPECT_EQ(cfg.to_key_values(), base.to_key_values());
}

TEST(PolyLr, EndpointsAndMidpoint) {
  EXPECT_EQ(poly_lr(5e-4, 0, 1000, 0.9), 5e-4);
  EXPECT_EQ(poly_lr(5e-4, 1000, 1000, 0.9), 0.0);
  EXPECT_EQ(poly_lr(5e-4, 1500, 1000, 0.9), 0.0);
  EXPECT_NEAR(poly_lr(5e-4, 500, 1000, 0.9), 2.6794e-4, 5e-9);
  EXPECT_DOUBLE_EQ(poly_lr(5e-4, 500, 1000, 0.9), 5e-4 * std::pow(0.5, 0.9));
}

TEST(PolyLr, NonIncreasing) {
  double prev = poly_lr(1.0, 0, 2000, 0.9);
  for (int64_t s = 1; s <= 2001; ++s) {
    const double lr = poly_lr(1.0, s, 2000, 0.9);
    EXPECT_LE(lr, prev);
    prev = lr;
  }
}

}  // namespace
}  // namespace depthseg
