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
#include <limits>
#include <random>

#include "depthseg/depth_space.hpp"
#include "depthseg/errors.hpp"
#include "oracles.hpp"

namespace depthseg {
namespace {

DepthMap single(double d, bool valid = true) {
  DepthMap m(1, 1);
  m.values(0, 0) = d;
  m.valid(0, 0) = valid;
  return m;
}

const DepthRange kOutdoor{0.1, 80.0};

TEST(LogDepth, Anchors) {
  EXPECT_EQ(to_log_depth(single(0.1), kOutdoor).values(0, 0), 0.0);
  EXPECT_EQ(to_log_depth(single(80.0), kOutdoor).values(0, 0), 1.0);
  EXPECT_NEAR(to_log_depth(single(std::sqrt(0.1 * 80.0)), kOutdoor).values(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(to_log_depth(single(10.0), kOutdoor).values(0, 0), std::log(100.0) / std::log(800.0), 1e-12);
  EXPECT_NEAR(to_log_depth(single(10.0), kOutdoor).values(0, 0), 0.68892, 1e-5);
  EXPECT_EQ(from_log_depth(to_log_depth(single(0.1), kOutdoor), kOutdoor).values(0, 0), 0.1);
  EXPECT_EQ(from_log_depth(to_log_depth(single(80.0), kOutdoor), kOutdoor).values(0, 0), 80.0);
}

TEST(LogDepth, RoundTripRandomDepths) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DepthMap m(10, 100);
  for (auto& v : m.values.data) v = 0.1 * std::pow(800.0, u(rng));
  std::fill(m.valid.data.begin(), m.valid.data.end(), 1);
  const auto back = from_log_depth(to_log_depth(m, kOutdoor), kOutdoor);
  for (int64_t i = 0; i < m.values.size(); ++i) {
    EXPECT_LT(std::fabs(back.values.data[i] - m.values.data[i]) / m.values.data[i], 1e-6);
    EXPECT_NEAR(to_log_depth(m, kOutdoor).values.data[i], oracle::log_depth(m.values.data[i], 0.1, 80.0), 1e-12);
  }
}

TEST(LogDepth, StrictlyMonotone) {
  double prev = -1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double d = 0.1 + (80.0 - 0.1) * i / 1000.0;
    const double l = to_log_depth(single(d), kOutdoor).values(0, 0);
    EXPECT_GT(l, prev);
    prev = l;
  }
}

TEST(LogDepth, ClampsOutOfRangeAndCounts) {
  DepthMap m(1, 3);
  m.values.data = {0.01, 5.0, 500.0};
  m.valid.data = {1, 1, 1};
  int64_t clamped = -1;
  const auto l = to_log_depth(m, kOutdoor, &clamped);
  EXPECT_EQ(clamped, 2);
  EXPECT_EQ(l.values.data[0], 0.0);
  EXPECT_EQ(l.values.data[2], 1.0);
}

TEST(LogDepth, InvalidPixelsPropagateWithZero) {
  DepthMap m(1, 2);
  m.values.data = {std::numeric_limits<double>::quiet_NaN(), 3.0};
  m.valid.data = {0, 1};
  const auto l = to_log_depth(m, kOutdoor);
  EXPECT_EQ(l.valid.data[0], 0);
  EXPECT_EQ(l.values.data[0], 0.0);
  EXPECT_EQ(l.valid.data[1], 1);
}

TEST(LogDepth, Errors) {
  EXPECT_THROW(to_log_depth(single(std::numeric_limits<double>::infinity()), kOutdoor), DataError);
  EXPECT_THROW(to_log_depth(single(std::nan("")), kOutdoor), DataError);
  DepthMap bad(2, 2);
  bad.valid = Mask(1, 2, 1);
  EXPECT_THROW(to_log_depth(bad, kOutdoor), DataError);
  EXPECT_THROW(to_log_depth(single(1.0), DepthRange{1.0, 1.0}), ConfigError);
  EXPECT_THROW(to_log_depth(single(1.0), DepthRange{0.0, 1.0}), ConfigError);

  LogDepthMap l(1, 1);
  l.valid(0, 0) = 1;
  l.values(0, 0) = 1.0 + 5e-7;
  EXPECT_EQ(from_log_depth(l, kOutdoor).values(0, 0), 80.0);
  l.values(0, 0) = -5e-7;
  EXPECT_EQ(from_log_depth(l, kOutdoor).values(0, 0), 0.1);
  l.values(0, 0) = 1.0 + 1e-5;
  EXPECT_THROW(from_log_depth(l, kOutdoor), DataError);
  l.values(0, 0) = -0.01;
  EXPECT_THROW(from_log_depth(l, kOutdoor), DataError);
}

TEST(Disparity, PinholeIdentity) {
  Grid<float> disp(1, 4);
  disp.data = {2.0f, 0.0f, -1.0f, std::numeric_limits<float>::quiet_NaN()};
  const auto d = disparity_to_depth(disp, 100.0, 1.0);
  EXPECT_DOUBLE_EQ(d.values.data[0], 50.0);
  EXPECT_EQ(d.valid.data[0], 1);
  for (int i = 1; i < 4; ++i) {
    EXPECT_EQ(d.valid.data[i], 0);
    EXPECT_EQ(d.values.data[i], 0.0);
  }
  Grid<float> ten(1, 1, 10.0f);
  EXPECT_NEAR(disparity_to_depth(ten, 2262.52, 0.209313).values(0, 0), 2262.52 * 0.209313 / 10.0, 1e-12);
  EXPECT_NEAR(disparity_to_depth(ten, 2262.52, 0.209313).values(0, 0), 47.358, 1e-3);
  EXPECT_THROW(disparity_to_depth(ten, 0.0, 1.0), ConfigError);
  EXPECT_THROW(disparity_to_depth(ten, 1.0, -1.0), ConfigError);
}

TEST(Disparity, StrictlyDecreasing) {
  Grid<float> disp(1, 100);
  for (int i = 0; i < 100; ++i) disp.data[static_cast<size_t>(i)] = 0.5f + static_cast<float>(i);
  const auto d = disparity_to_depth(disp, 700.0, 0.5);
  for (int i = 1; i < 100; ++i) EXPECT_LT(d.values.data[static_cast<size_t>(i)], d.values.data[static_cast<size_t>(i - 1)]);
}

TEST(ValidityMask, Cases) {
  DepthMap m(1, 4);
  m.values.data = {1.0, 0.0, std::nan(""), 2.0};
  m.valid.data = {1, 1, 1, 0};
  const auto mask = validity_mask(m);
  EXPECT_EQ(mask.data, (std::vector<uint8_t>{1, 0, 0, 0}));
  DepthMap all(3, 3);
  std::fill(all.values.data.begin(), all.values.data.end(), 5.0);
  std::fill(all.valid.data.begin(), all.valid.data.end(), 1);
  for (auto v : validity_mask(all).data) EXPECT_EQ(v, 1);
}

TEST(ValidityMask, NeverGrows) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 100.0);
  DepthMap m(8, 8);
  for (size_t i = 0; i < m.values.data.size(); ++i) {
    m.values.data[i] = u(rng);
    m.valid.data[i] = (i % 3) != 0;
  }
  const auto mask = validity_mask(m);
  DepthMap clamped = m;
  clamp_to_range(clamped, kOutdoor);
  const auto l = to_log_depth(clamped, kOutdoor);
  for (size_t i = 0; i < mask.data.size(); ++i) {
    EXPECT_LE(mask.data[i], m.valid.data[i]);
    EXPECT_LE(l.valid.data[i], m.valid.data[i]);
  }
}

}  // namespace
}  // namespace depthseg
