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
#include "depthseg/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>

#include "depthseg/errors.hpp"

namespace depthseg {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_fail(png_structp, png_const_charp msg) { throw DataError(std::string("png: ") + msg); }
void png_warn(png_structp, png_const_charp) {}

}  // namespace

PngData read_png(const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw DataError("cannot open " + path);
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) throw DataError("not a PNG file: " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};
  PngData out;
  try {
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    const int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (depth == 16) png_set_swap(png);  // host order (little endian)
    png_read_update_info(png, info);
    out.height = png_get_image_height(png, info);
    out.width = png_get_image_width(png, info);
    out.channels = png_get_channels(png, info);
    out.bit_depth = png_get_bit_depth(png, info);
    if (out.channels != 1 && out.channels != 3) throw DataError("unsupported PNG channel count in " + path);
    const size_t row_bytes = png_get_rowbytes(png, info);
    std::vector<unsigned char> buf(row_bytes * static_cast<size_t>(out.height));
    std::vector<png_bytep> rows(static_cast<size_t>(out.height));
    for (int64_t r = 0; r < out.height; ++r) rows[r] = buf.data() + r * row_bytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    const size_t n = static_cast<size_t>(out.height * out.width * out.channels);
    out.samples.resize(n);
    if (out.bit_depth == 16) {
      for (int64_t r = 0; r < out.height; ++r) {
        std::memcpy(out.samples.data() + r * out.width * out.channels, rows[r], out.width * out.channels * 2);
      }
    } else {
      for (int64_t r = 0; r < out.height; ++r) {
        for (int64_t c = 0; c < out.width * out.channels; ++c) out.samples[r * out.width * out.channels + c] = rows[r][c];
      }
    }
  } catch (const DataError& e) {
    throw DataError(std::string(e.what()) + " (" + path + ")");
  }
  return out;
}

void write_png(const std::string& path, const PngData& data) {
  if (data.channels != 1 && data.channels != 3) throw std::invalid_argument("write_png: channels must be 1 or 3");
  if (data.bit_depth != 8 && data.bit_depth != 16) throw std::invalid_argument("write_png: bit depth must be 8 or 16");
  if (data.samples.size() != static_cast<size_t>(data.height * data.width * data.channels)) {
    throw std::invalid_argument("write_png: sample count does not match the shape");
  }
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw DataError("cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_write_struct(p, i); }
  } guard{&png, &info};
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(data.width), static_cast<png_uint_32>(data.height), data.bit_depth,
               data.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const int64_t stride = data.width * data.channels;
  std::vector<unsigned char> row(static_cast<size_t>(stride * (data.bit_depth / 8)));
  for (int64_t r = 0; r < data.height; ++r) {
    for (int64_t c = 0; c < stride; ++c) {
      const uint16_t v = data.samples[r * stride + c];
      if (data.bit_depth == 16) {
        row[2 * c] = static_cast<unsigned char>(v >> 8);  // PNG is big endian
        row[2 * c + 1] = static_cast<unsigned char>(v & 0xff);
      } else {
        row[c] = static_cast<unsigned char>(v);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
}

void write_rgb_png(const std::string& path, const Image& image) {
  PngData d{image.height, image.width, 3, 8, {}};
  d.samples.resize(image.rgb.size());
  for (size_t i = 0; i < image.rgb.size(); ++i) {
    d.samples[i] = static_cast<uint16_t>(std::lround(std::clamp(image.rgb[i], 0.f, 1.f) * 255.f));
  }
  write_png(path, d);
}

Image read_rgb_png(const std::string& path) {
  PngData d = read_png(path);
  if (d.channels != 3) throw DataError("expected an RGB image: " + path);
  const double scale = d.bit_depth == 16 ? 65535.0 : 255.0;
  Image img(d.height, d.width);
  for (size_t i = 0; i < d.samples.size(); ++i) img.rgb[i] = static_cast<float>(d.samples[i] / scale);
  return img;
}

void write_label_png(const std::string& path, const Grid<int32_t>& labels) {
  PngData d{labels.height, labels.width, 1, 8, {}};
  d.samples.resize(labels.data.size());
  for (size_t i = 0; i < labels.data.size(); ++i) {
    if (labels.data[i] < 0 || labels.data[i] > 255) throw DataError("label " + std::to_string(labels.data[i]) + " does not fit in 8 bits");
    d.samples[i] = static_cast<uint16_t>(labels.data[i]);
  }
  write_png(path, d);
}

Grid<int32_t> read_label_png(const std::string& path) {
  PngData d = read_png(path);
  if (d.channels != 1 || d.bit_depth != 8) throw DataError("expected an 8-bit gray label image: " + path);
  Grid<int32_t> g(d.height, d.width);
  for (size_t i = 0; i < d.samples.size(); ++i) g.data[i] = d.samples[i];
  return g;
}

void write_depth_png(const std::string& path, const DepthMap& depth) {
  PngData d{depth.height(), depth.width(), 1, 16, {}};
  d.samples.resize(depth.values.data.size());
  for (size_t i = 0; i < d.samples.size(); ++i) {
    if (!depth.valid.data[i]) continue;
    const double mm = std::round(depth.values.data[i] * 1000.0);
    if (!std::isfinite(mm) || mm < 1.0 || mm > 65535.0) {
      throw DataError("depth " + std::to_string(depth.values.data[i]) + " m is not representable in 16-bit millimeters");
    }
    d.samples[i] = static_cast<uint16_t>(mm);
  }
  write_png(path, d);
}

DepthMap read_depth_png(const std::string& path) {
  PngData d = read_png(path);
  if (d.channels != 1 || d.bit_depth != 16) throw DataError("expected a 16-bit gray depth image: " + path);
  DepthMap m(d.height, d.width);
  for (size_t i = 0; i < d.samples.size(); ++i) {
    if (d.samples[i] == 0) continue;
    m.values.data[i] = d.samples[i] / 1000.0;
    m.valid.data[i] = 1;
  }
  return m;
}

void write_f32_grid(const std::string& path, const Grid<float>& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  static_assert(sizeof(float) == 4);
  out.write(reinterpret_cast<const char*>(grid.data.data()), static_cast<std::streamsize>(grid.data.size() * 4));
  if (!out) throw DataError("short write to " + path);
}

Grid<float> read_f32_grid(const std::string& path, int64_t height, int64_t width) {
  std::error_code ec;
  const auto bytes = std::filesystem::file_size(path, ec);
  if (ec) throw DataError("cannot open " + path);
  if (bytes != static_cast<uintmax_t>(height * width * 4)) {
    throw DataError(path + ": expected " + std::to_string(height * width * 4) + " bytes for a " +
                    std::to_string(height) + "x" + std::to_string(width) + " float grid, found " + std::to_string(bytes));
  }
  Grid<float> g(height, width);
  std::ifstream in(path, std::ios::binary);
  in.read(reinterpret_cast<char*>(g.data.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw DataError("short read from " + path);
  return g;
}

DepthMap read_depth_file(const std::string& path, int64_t height, int64_t width) {
  const auto ext = std::filesystem::path(path).extension().string();
  if (ext == ".png") {
    DepthMap m = read_depth_png(path);
    if (m.height() != height || m.width() != width) throw DataError("depth map has unexpected size: " + path);
    return m;
  }
  if (ext == ".f32") {
    Grid<float> g = read_f32_grid(path, height, width);
    DepthMap m(height, width);
    for (int64_t i = 0; i < g.size(); ++i) {
      const float v = g.data[i];
      if (std::isfinite(v) && v > 0.f) {
        m.values.data[i] = v;
        m.valid.data[i] = 1;
      }
    }
    return m;
  }
  throw DataError("unrecognized depth file extension '" + ext + "': " + path);
}

}  // namespace depthseg
