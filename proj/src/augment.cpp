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
#include "depthseg/augment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "depthseg/errors.hpp"

namespace depthseg {

void AugConfig::validate() const {
  auto prob = [](double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; };
  if (n_patches < 0) throw ConfigError("aug.n_patches must be >= 0");
  if (!(min_frac > 0.0) || !(min_frac <= max_frac) || !(max_frac <= 1.0)) {
    throw ConfigError("aug: need 0 < min_frac <= max_frac <= 1");
  }
  if (!prob(flip_prob)) throw ConfigError("aug.flip_prob must lie in [0, 1]");
  if (!prob(mixup_prob)) throw ConfigError("aug.mixup_prob must lie in [0, 1]");
  for (double r : {brightness, contrast, gamma, hue, saturation, value}) {
    if (!std::isfinite(r) || r < 0.0) throw ConfigError("aug: photometric ranges must be finite and >= 0");
  }
  if (contrast >= 1.0 || gamma >= 1.0 || saturation >= 1.0 || value >= 1.0) {
    throw ConfigError("aug: multiplicative ranges must stay below 1");
  }
}

namespace {

double uniform(Rng& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double d = mx - mn;
  v = mx;
  s = mx > 0.0 ? d / mx : 0.0;
  if (d <= 0.0) {
    h = 0.0;
  } else if (mx == r) {
    h = std::fmod((g - b) / d + 6.0, 6.0) / 6.0;
  } else if (mx == g) {
    h = ((b - r) / d + 2.0) / 6.0;
  } else {
    h = ((r - g) / d + 4.0) / 6.0;
  }
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
  const double hh = (h - std::floor(h)) * 6.0;
  const int sector = static_cast<int>(hh) % 6;
  const double f = hh - std::floor(hh);
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
}

template <typename T>
void copy_block(const Grid<T>& from, Grid<T>& to, const Patch& src, const Patch& dst) {
  for (int64_t r = 0; r < src.side; ++r) {
    for (int64_t c = 0; c < src.side; ++c) to(dst.row + r, dst.col + c) = from(src.row + r, src.col + c);
  }
}

}  // namespace

PhotometricParams draw_photometric(Rng& rng, const AugConfig& cfg) {
  PhotometricParams p;
  p.brightness = uniform(rng, -cfg.brightness, cfg.brightness);
  p.contrast = uniform(rng, 1.0 - cfg.contrast, 1.0 + cfg.contrast);
  p.gamma = uniform(rng, 1.0 - cfg.gamma, 1.0 + cfg.gamma);
  p.hue_shift = uniform(rng, -cfg.hue, cfg.hue);
  p.saturation = uniform(rng, 1.0 - cfg.saturation, 1.0 + cfg.saturation);
  p.value = uniform(rng, 1.0 - cfg.value, 1.0 + cfg.value);
  return p;
}

void apply_photometric(Image& image, const PhotometricParams& p) {
  auto& px = image.rgb;
  if (p.brightness != 0.0) {
    for (auto& v : px) v = static_cast<float>(std::clamp(v + p.brightness, 0.0, 1.0));
  }
  if (p.contrast != 1.0 && !px.empty()) {
    double mean = 0.0;
    for (float v : px) mean += v;
    mean /= static_cast<double>(px.size());
    for (auto& v : px) v = static_cast<float>(std::clamp((v - mean) * p.contrast + mean, 0.0, 1.0));
  }
  if (p.gamma != 1.0) {
    for (auto& v : px) v = static_cast<float>(std::pow(std::clamp<double>(v, 0.0, 1.0), p.gamma));
  }
  if (p.hue_shift != 0.0 || p.saturation != 1.0 || p.value != 1.0) {
    for (size_t i = 0; i + 2 < px.size(); i += 3) {
      double h, s, v;
      rgb_to_hsv(px[i], px[i + 1], px[i + 2], h, s, v);
      h += p.hue_shift;
      s = std::clamp(s * p.saturation, 0.0, 1.0);
      v = std::clamp(v * p.value, 0.0, 1.0);
      double r, g, b;
      hsv_to_rgb(h, s, v, r, g, b);
      px[i] = static_cast<float>(std::clamp(r, 0.0, 1.0));
      px[i + 1] = static_cast<float>(std::clamp(g, 0.0, 1.0));
      px[i + 2] = static_cast<float>(std::clamp(b, 0.0, 1.0));
    }
  }
}

Image photometric(Image image, Rng& rng, const AugConfig& cfg) {
  apply_photometric(image, draw_photometric(rng, cfg));
  return image;
}

void mirror(Sample& s) {
  const int64_t h = s.height(), w = s.width();
  for (int64_t r = 0; r < h; ++r) {
    for (int64_t c = 0; c < w / 2; ++c) {
      const int64_t m = w - 1 - c;
      for (int ch = 0; ch < 3; ++ch) std::swap(s.image.at(r, c, ch), s.image.at(r, m, ch));
      std::swap(s.depth.values(r, c), s.depth.values(r, m));
      std::swap(s.depth.valid(r, c), s.depth.valid(r, m));
      std::swap(s.labels(r, c), s.labels(r, m));
    }
  }
}

Sample hflip(Sample sample, Rng& rng, double p) {
  if (std::bernoulli_distribution(p)(rng)) mirror(sample);
  return sample;
}

std::vector<int64_t> patch_sizes(int64_t height, int64_t width, const AugConfig& cfg) {
  const int64_t unit = std::max<int64_t>(1, height / 8);
  const double lo = cfg.min_frac * static_cast<double>(height);
  const double hi = cfg.max_frac * static_cast<double>(height);
  std::vector<int64_t> sizes;
  for (int64_t s = unit; s <= height; s += unit) {
    if (static_cast<double>(s) >= lo - 1e-9 && static_cast<double>(s) <= hi + 1e-9) sizes.push_back(s);
  }
  if (sizes.empty()) throw ConfigError("patch mixup: no patch size fits the configured fraction range");
  if (sizes.back() > width || sizes.back() > height) {
    throw ConfigError("patch mixup: patch side " + std::to_string(sizes.back()) + " exceeds the image");
  }
  return sizes;
}

PatchPlan plan_patch_mixup(const std::vector<Sample>& batch, Rng& rng, const AugConfig& cfg) {
  PatchPlan plan;
  if (batch.empty() || cfg.n_patches == 0) return plan;
  const int64_t h = batch.front().height(), w = batch.front().width();
  for (const auto& s : batch) {
    if (s.height() != h || s.width() != w) throw DataError("patch mixup: samples differ in size");
  }
  const auto sizes = patch_sizes(h, w, cfg);
  for (int i = 0; i < static_cast<int>(batch.size()); ++i) {
    for (int n = 0; n < cfg.n_patches; ++n) {
      Patch p;
      p.image = i;
      p.side = sizes[std::uniform_int_distribution<size_t>(0, sizes.size() - 1)(rng)];
      p.row = std::uniform_int_distribution<int64_t>(0, h - p.side)(rng);
      p.col = std::uniform_int_distribution<int64_t>(0, w - p.side)(rng);
      plan.patches.push_back(p);
    }
  }
  // Group patches that may trade places, in selection order.
  std::map<std::pair<int64_t, int>, std::vector<size_t>> groups;
  for (size_t j = 0; j < plan.patches.size(); ++j) {
    const auto& p = plan.patches[j];
    const int owner = cfg.mixup_mode == MixupMode::SameImage ? p.image : -1;
    groups[{p.side, owner}].push_back(j);
  }
  plan.source.resize(plan.patches.size());
  for (auto& [key, members] : groups) {
    std::vector<size_t> shuffled = members;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (size_t m = 0; m < members.size(); ++m) plan.source[members[m]] = shuffled[m];
  }
  return plan;
}

void apply_patch_plan(std::vector<Sample>& batch, const PatchPlan& plan) {
  if (plan.patches.empty()) return;
  if (plan.source.size() != plan.patches.size()) throw std::invalid_argument("patch plan: source/patch count mismatch");
  for (size_t j = 0; j < plan.patches.size(); ++j) {
    const auto& p = plan.patches[j];
    const auto& q = plan.patches[plan.source[j]];
    if (p.side != q.side) throw std::invalid_argument("patch plan: exchanged patches differ in size");
    for (const auto* x : {&p, &q}) {
      if (x->image < 0 || x->image >= static_cast<int>(batch.size()) || x->row < 0 || x->col < 0 ||
          x->row + x->side > batch[x->image].height() || x->col + x->side > batch[x->image].width()) {
        throw DataError("patch plan: patch lies outside its image");
      }
    }
  }
  const std::vector<Sample> original = batch;
  for (size_t j = 0; j < plan.patches.size(); ++j) {
    const Patch& dst = plan.patches[j];
    const Patch& src = plan.patches[plan.source[j]];
    const Sample& from = original[src.image];
    Sample& to = batch[dst.image];
    for (int64_t r = 0; r < src.side; ++r) {
      for (int64_t c = 0; c < src.side; ++c) {
        for (int ch = 0; ch < 3; ++ch) to.image.at(dst.row + r, dst.col + c, ch) = from.image.at(src.row + r, src.col + c, ch);
      }
    }
    copy_block(from.depth.values, to.depth.values, src, dst);
    copy_block(from.depth.valid, to.depth.valid, src, dst);
    copy_block(from.labels, to.labels, src, dst);
  }
}

std::vector<Sample> patch_mixup(std::vector<Sample> batch, Rng& rng, const AugConfig& cfg) {
  const PatchPlan plan = plan_patch_mixup(batch, rng, cfg);
  apply_patch_plan(batch, plan);
  return batch;
}

std::vector<Sample> augment_batch(std::vector<Sample> batch, Rng& rng, const AugConfig& cfg) {
  for (auto& s : batch) {
    apply_photometric(s.image, draw_photometric(rng, cfg));
    s = hflip(std::move(s), rng, cfg.flip_prob);
  }
  if (std::bernoulli_distribution(cfg.mixup_prob)(rng)) batch = patch_mixup(std::move(batch), rng, cfg);
  return batch;
}

}  // namespace depthseg
