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
#include "depthseg/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "depthseg/errors.hpp"
#include "depthseg/io.hpp"

namespace fs = std::filesystem;

namespace depthseg {

void DatasetManifest::validate() const {
  range.validate();
  if (num_classes < 2 || num_classes > 255) throw ConfigError("manifest: num_classes must lie in [2, 255]");
  if (ignore_id >= 0 && ignore_id < num_classes) throw ConfigError("manifest: ignore_id collides with a class id");
  if (height < 1 || width < 1) throw ConfigError("manifest: height and width must be positive");
  if (!class_names.empty() && static_cast<int>(class_names.size()) != num_classes) {
    throw ConfigError("manifest: class_names must list num_classes entries");
  }
  for (double s : std) {
    if (!(s > 0.0)) throw ConfigError("manifest: std entries must be positive");
  }
}

KeyValues DatasetManifest::to_key_values() const {
  auto join = [](const auto& items) {
    std::string s;
    for (const auto& x : items) {
      if (!s.empty()) s += ",";
      if constexpr (std::is_same_v<std::decay_t<decltype(x)>, std::string>) {
        s += x;
      } else {
        s += format_double(x);
      }
    }
    return s;
  };
  KeyValues kv;
  kv["format_version"] = "1";
  kv["num_classes"] = std::to_string(num_classes);
  kv["ignore_id"] = std::to_string(ignore_id);
  kv["d_min"] = format_double(range.d_min);
  kv["d_max"] = format_double(range.d_max);
  kv["class_names"] = join(class_names);
  kv["mean"] = join(mean);
  kv["std"] = join(std);
  kv["height"] = std::to_string(height);
  kv["width"] = std::to_string(width);
  kv["splits"] = join(splits);
  return kv;
}

DatasetManifest DatasetManifest::from_key_values(const KeyValues& kv, const std::string& root) {
  static const std::set<std::string> known{"format_version", "num_classes", "ignore_id", "d_min", "d_max", "class_names",
                                           "mean", "std", "height", "width", "splits"};
  for (const auto& [k, v] : kv) {
    if (!known.count(k)) throw ConfigError("manifest: unknown key '" + k + "'");
  }
  auto need = [&](const std::string& k) -> const std::string& {
    auto it = kv.find(k);
    if (it == kv.end()) throw ConfigError("manifest: missing key '" + k + "'");
    return it->second;
  };
  DatasetManifest m;
  m.root = root;
  if (parse_int("format_version", need("format_version")) != 1) throw ConfigError("manifest: unsupported format_version");
  m.num_classes = static_cast<int>(parse_int("num_classes", need("num_classes")));
  m.ignore_id = static_cast<int>(parse_int("ignore_id", need("ignore_id")));
  m.range = {parse_double("d_min", need("d_min")), parse_double("d_max", need("d_max"))};
  m.class_names = split_list(need("class_names"));
  auto triple = [&](const std::string& key) {
    auto items = split_list(need(key));
    if (items.size() != 3) throw ConfigError("manifest: '" + key + "' needs three comma-separated values");
    return std::array<double, 3>{parse_double(key, items[0]), parse_double(key, items[1]), parse_double(key, items[2])};
  };
  m.mean = triple("mean");
  m.std = triple("std");
  m.height = parse_int("height", need("height"));
  m.width = parse_int("width", need("width"));
  m.splits = split_list(need("splits"));
  m.validate();
  return m;
}

DatasetManifest DatasetManifest::load(const std::string& root) {
  const auto path = (fs::path(root) / kManifestFile).string();
  if (!fs::exists(path)) throw DataError("dataset manifest not found: " + path);
  return from_key_values(read_key_values(path), root);
}

void DatasetManifest::save(const std::string& root) const {
  fs::create_directories(root);
  write_key_values((fs::path(root) / kManifestFile).string(), to_key_values());
}

std::vector<Sample> load_dataset(const std::string& root, const std::string& split, const DatasetManifest& manifest) {
  const fs::path base = fs::path(root) / split;
  const fs::path image_dir = base / "image";
  if (!fs::is_directory(base)) throw DataError("split directory not found: " + base.string());
  std::vector<std::string> ids;
  if (fs::is_directory(image_dir)) {
    for (const auto& entry : fs::directory_iterator(image_dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".png") ids.push_back(entry.path().stem().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  std::vector<Sample> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    Sample s;
    s.id = id;
    const auto image_path = (image_dir / (id + ".png")).string();
    s.image = read_rgb_png(image_path);
    if (s.image.height != manifest.height || s.image.width != manifest.width) {
      throw DataError("image size differs from the manifest: " + image_path);
    }
    fs::path depth_path = base / "depth" / (id + ".png");
    if (!fs::exists(depth_path)) depth_path = base / "depth" / (id + ".f32");
    if (!fs::exists(depth_path)) throw DataError("missing depth file for sample '" + id + "' in " + (base / "depth").string());
    s.depth = read_depth_file(depth_path.string(), manifest.height, manifest.width);
    s.depth.valid = validity_mask(s.depth);
    const auto label_path = (base / "label" / (id + ".png")).string();
    if (!fs::exists(label_path)) throw DataError("missing label file: " + label_path);
    s.labels = read_label_png(label_path);
    if (!s.labels.same_shape(s.depth.values)) throw DataError("label map size differs from the image: " + label_path);
    for (int32_t v : s.labels.data) {
      if (v != manifest.ignore_id && (v < 0 || v >= manifest.num_classes)) {
        throw DataError("label " + std::to_string(v) + " out of range in " + label_path);
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

void save_sample(const std::string& root, const std::string& split, const Sample& s) {
  const fs::path base = fs::path(root) / split;
  for (const char* sub : {"image", "depth", "label"}) fs::create_directories(base / sub);
  write_rgb_png((base / "image" / (s.id + ".png")).string(), s.image);
  write_depth_png((base / "depth" / (s.id + ".png")).string(), s.depth);
  write_label_png((base / "label" / (s.id + ".png")).string(), s.labels);
}

void SyntheticSpec::validate() const {
  if (num_classes < 2) throw ConfigError("synthetic data: need at least 2 classes");
  if (num_classes > 8) throw ConfigError("synthetic data: at most 8 classes are supported");
  if (height < 8 || width < 8) throw ConfigError("synthetic data: image must be at least 8x8");
  range.validate();
  if (range.d_max > 65.535) throw ConfigError("synthetic data: d_max above 65.535 m does not fit 16-bit millimeter depth files");
  if (!(noise >= 0.0)) throw ConfigError("synthetic data: noise must be >= 0");
}

bool SceneShape::covers(int64_t r, int64_t c) const {
  const double dy = (static_cast<double>(r) + 0.5 - center_row) / half_height;
  const double dx = (static_cast<double>(c) + 0.5 - center_col) / half_width;
  if (ellipse) return dx * dx + dy * dy <= 1.0;
  return std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
}

std::array<float, 3> class_color(int class_id) {
  static constexpr std::array<std::array<float, 3>, 8> palette{{
      {0.60f, 0.60f, 0.60f},
      {1.00f, 0.20f, 0.20f},
      {0.20f, 1.00f, 0.20f},
      {0.20f, 0.30f, 1.00f},
      {1.00f, 0.90f, 0.20f},
      {0.90f, 0.20f, 1.00f},
      {0.20f, 0.90f, 1.00f},
      {1.00f, 0.60f, 0.20f},
  }};
  return palette[static_cast<size_t>(class_id) % palette.size()];
}

Scene render_scene(uint64_t seed, const SyntheticSpec& spec, const std::string& id) {
  spec.validate();
  Rng rng(seed);
  const int64_t h = spec.height, w = spec.width;
  const double hd = static_cast<double>(h), wd = static_cast<double>(w);
  Scene scene;
  const int count = std::uniform_int_distribution<int>(3, 8)(rng);
  const double log_lo = std::log(spec.range.d_min), log_hi = std::log(spec.range.d_max * 0.9);
  for (int i = 0; i < count; ++i) {
    SceneShape s;
    s.ellipse = std::bernoulli_distribution(0.5)(rng);
    s.class_id = std::uniform_int_distribution<int>(1, spec.num_classes - 1)(rng);
    s.center_row = std::uniform_real_distribution<double>(0.0, hd)(rng);
    s.center_col = std::uniform_real_distribution<double>(0.0, wd)(rng);
    s.half_height = std::uniform_real_distribution<double>(hd / 16.0, hd / 4.0)(rng);
    s.half_width = std::uniform_real_distribution<double>(wd / 16.0, wd / 4.0)(rng);
    s.depth = std::exp(std::uniform_real_distribution<double>(log_lo, log_hi)(rng));
    scene.shapes.push_back(s);
  }
  // Far to near, so nearer shapes overwrite farther ones.
  std::vector<size_t> order(scene.shapes.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scene.shapes[a].depth > scene.shapes[b].depth; });

  Sample& s = scene.sample;
  s.id = id;
  s.image = Image(h, w);
  s.depth = DepthMap(h, w);
  s.labels = Grid<int32_t>(h, w, 0);
  for (int64_t i = 0; i < s.depth.values.size(); ++i) {
    s.depth.values.data[i] = spec.range.d_max;
    s.depth.valid.data[i] = 1;
  }
  for (size_t idx : order) {
    const SceneShape& sh = scene.shapes[idx];
    for (int64_t r = 0; r < h; ++r) {
      for (int64_t c = 0; c < w; ++c) {
        if (!sh.covers(r, c)) continue;
        s.depth.values(r, c) = sh.depth;
        s.labels(r, c) = sh.class_id;
      }
    }
  }
  std::normal_distribution<double> noise(0.0, spec.noise);
  for (int64_t r = 0; r < h; ++r) {
    for (int64_t c = 0; c < w; ++c) {
      const auto color = class_color(s.labels(r, c));
      // Nearer surfaces are brighter.
      const double shade = 0.3 + 0.7 * (1.0 - log_depth(s.depth.values(r, c), spec.range));
      for (int ch = 0; ch < 3; ++ch) {
        const double v = color[ch] * shade + (spec.noise > 0.0 ? noise(rng) : 0.0);
        s.image.at(r, c, ch) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return scene;
}

void gen_synthetic(const std::string& root, const std::string& split, uint64_t seed, int64_t count,
                   const SyntheticSpec& spec) {
  spec.validate();
  if (count < 0) throw ConfigError("synthetic data: count must be >= 0");
  const fs::path base = fs::path(root) / split;
  for (const char* sub : {"image", "depth", "label"}) fs::create_directories(base / sub);
  const uint64_t split_tag = hash_string(split);
  for (int64_t i = 0; i < count; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "%06lld", static_cast<long long>(i));
    Scene scene = render_scene(mix_seed(seed, split_tag, static_cast<uint64_t>(i)), spec, id);
    save_sample(root, split, scene.sample);
  }
}

DatasetManifest synthetic_manifest(const SyntheticSpec& spec, const std::vector<std::string>& splits) {
  static const std::array<const char*, 8> names{"background", "red", "green", "blue", "yellow", "magenta", "cyan", "orange"};
  DatasetManifest m;
  m.num_classes = spec.num_classes;
  m.ignore_id = kDefaultIgnoreId;
  m.range = spec.range;
  for (int k = 0; k < spec.num_classes; ++k) m.class_names.emplace_back(names[static_cast<size_t>(k)]);
  m.height = spec.height;
  m.width = spec.width;
  m.splits = splits;
  return m;
}

Sample center_crop(const Sample& s, int64_t height, int64_t width) {
  if (height > s.height() || width > s.width() || height < 1 || width < 1) {
    throw ConfigError("center crop " + std::to_string(height) + "x" + std::to_string(width) + " does not fit the sample");
  }
  if (height == s.height() && width == s.width()) return s;
  const int64_t r0 = (s.height() - height) / 2, c0 = (s.width() - width) / 2;
  Sample out;
  out.id = s.id;
  out.image = Image(height, width);
  out.depth = DepthMap(height, width);
  out.labels = Grid<int32_t>(height, width);
  for (int64_t r = 0; r < height; ++r) {
    for (int64_t c = 0; c < width; ++c) {
      for (int ch = 0; ch < 3; ++ch) out.image.at(r, c, ch) = s.image.at(r0 + r, c0 + c, ch);
      out.depth.values(r, c) = s.depth.values(r0 + r, c0 + c);
      out.depth.valid(r, c) = s.depth.valid(r0 + r, c0 + c);
      out.labels(r, c) = s.labels(r0 + r, c0 + c);
    }
  }
  return out;
}

TensorSample sample_to_tensors(const Sample& s, const DatasetManifest& manifest) {
  const int64_t h = s.height(), w = s.width();
  TensorSample t;
  t.image = torch::empty({3, h, w}, torch::kFloat);
  auto img = t.image.accessor<float, 3>();
  for (int64_t r = 0; r < h; ++r) {
    for (int64_t c = 0; c < w; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        img[ch][r][c] = static_cast<float>((s.image.at(r, c, ch) - manifest.mean[ch]) / manifest.std[ch]);
      }
    }
  }
  const LogDepthMap log_map = to_log_depth(s.depth, manifest.range);
  t.log_depth = torch::from_blob(const_cast<double*>(log_map.values.data.data()), {1, h, w}, torch::kDouble)
                    .to(torch::kFloat);
  t.valid = torch::from_blob(const_cast<uint8_t*>(log_map.valid.data.data()), {1, h, w}, torch::kUInt8)
                .to(torch::kBool);
  t.labels = torch::from_blob(const_cast<int32_t*>(s.labels.data.data()), {h, w}, torch::kInt).to(torch::kLong);
  return t;
}

Image denormalize(const torch::Tensor& image, const DatasetManifest& manifest) {
  auto t = image.to(torch::kDouble).contiguous();
  const int64_t h = t.size(1), w = t.size(2);
  auto a = t.accessor<double, 3>();
  Image out(h, w);
  for (int64_t r = 0; r < h; ++r) {
    for (int64_t c = 0; c < w; ++c) {
      for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = static_cast<float>(a[ch][r][c] * manifest.std[ch] + manifest.mean[ch]);
    }
  }
  return out;
}

TensorBatch make_batch(const std::vector<Sample>& samples, const DatasetManifest& manifest, torch::ScalarType dtype) {
  if (samples.empty()) throw DataError("make_batch: empty batch");
  const int64_t b = static_cast<int64_t>(samples.size());
  const int64_t h = samples.front().height(), w = samples.front().width();
  auto images = torch::empty({b, 3, h, w}, torch::kDouble);
  auto depth = torch::zeros({b, 1, h, w}, torch::kDouble);
  auto valid = torch::zeros({b, 1, h, w}, torch::kBool);
  auto labels = torch::empty({b, h, w}, torch::kLong);
  auto ia = images.accessor<double, 4>();
  auto da = depth.accessor<double, 4>();
  auto va = valid.accessor<bool, 4>();
  auto la = labels.accessor<int64_t, 3>();
  for (int64_t i = 0; i < b; ++i) {
    const Sample& s = samples[static_cast<size_t>(i)];
    if (s.height() != h || s.width() != w) throw DataError("make_batch: samples differ in size");
    for (int64_t r = 0; r < h; ++r) {
      for (int64_t c = 0; c < w; ++c) {
        for (int ch = 0; ch < 3; ++ch) ia[i][ch][r][c] = (s.image.at(r, c, ch) - manifest.mean[ch]) / manifest.std[ch];
        const double d = s.depth.values(r, c);
        const bool ok = s.depth.valid(r, c) && std::isfinite(d) && d > 0.0;
        va[i][0][r][c] = ok;
        da[i][0][r][c] = ok ? std::clamp(d, manifest.range.d_min, manifest.range.d_max) : 0.0;
        la[i][r][c] = s.labels(r, c);
      }
    }
  }
  return {images.to(dtype), depth.to(dtype), valid, labels};
}

}  // namespace depthseg
