// Copyright 2026 The Fuselab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "fuselab/error.hpp"

namespace fuselab {

/// 8-bit raster image, row-major, 1 (grayscale) or 3 (RGB) channels.
class RasterImage {
 public:
  RasterImage() = default;

  RasterImage(int width, int height, int channels, std::uint8_t fill = 0)
      : width_(width), height_(height), channels_(channels) {
    check_shape(width, height, channels);
    pixels_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  static RasterImage from_pixels(int width, int height, int channels,
                                 std::vector<std::uint8_t> pixels) {
    check_shape(width, height, channels);
    if (pixels.size() != static_cast<std::size_t>(width) * height * channels) {
      throw ValidationError("pixel buffer length does not match width*height*channels");
    }
    RasterImage img;
    img.width_ = width;
    img.height_ = height;
    img.channels_ = channels;
    img.pixels_ = std::move(pixels);
    return img;
  }

  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] int height() const { return height_; }
  [[nodiscard]] int channels() const { return channels_; }
  [[nodiscard]] bool empty() const { return pixels_.empty(); }

  [[nodiscard]] std::uint8_t at(int x, int y, int c = 0) const {
    return pixels_[index(x, y, c)];
  }
  std::uint8_t& at(int x, int y, int c = 0) { return pixels_[index(x, y, c)]; }

  [[nodiscard]] const std::vector<std::uint8_t>& pixels() const { return pixels_; }
  std::vector<std::uint8_t>& pixels() { return pixels_; }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  static void check_shape(int width, int height, int channels) {
    if (width <= 0 || height <= 0) {
      throw ValidationError("image dimensions must be positive");
    }
    if (channels != 1 && channels != 3) {
      throw ValidationError("image must have 1 or 3 channels");
    }
  }

  [[nodiscard]] std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> pixels_;
};

inline std::uint8_t clamp_to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

/// ITU-R BT.601 luma conversion, rounded half-up.
inline RasterImage to_grayscale(const RasterImage& img) {
  if (img.channels() != 3) {
    throw ValidationError("to_grayscale expects a 3-channel image");
  }
  RasterImage out(img.width(), img.height(), 1);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double gray =
          0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
      out.at(x, y) = clamp_to_byte(gray);
    }
  }
  return out;
}

/// Otsu threshold over the 256-bin histogram: the smallest candidate t
/// maximizing the between-class variance w0*w1*(mu0-mu1)^2. Candidates start
/// at the lowest occupied bin so the low class is never empty; a constant
/// image therefore thresholds at its own level and maps to all-black.
inline int otsu_threshold(const RasterImage& gray) {
  if (gray.channels() != 1) {
    throw ValidationError("otsu_threshold expects a grayscale image");
  }
  std::array<std::uint64_t, 256> hist{};
  for (std::uint8_t v : gray.pixels()) ++hist[v];

  const double total = static_cast<double>(gray.pixels().size());
  double sum_all = 0.0;
  for (int i = 0; i < 256; ++i) sum_all += static_cast<double>(i) * hist[i];

  int best_t = 255;
  double best_var = -1.0;
  double w0 = 0.0;
  double sum0 = 0.0;
  for (int t = 0; t < 256; ++t) {
    w0 += static_cast<double>(hist[t]);
    sum0 += static_cast<double>(t) * hist[t];
    if (w0 == 0.0) continue;  // below the lowest occupied bin
    const double w1 = total - w0;
    double var = 0.0;
    if (w1 > 0.0) {
      const double mu0 = sum0 / w0;
      const double mu1 = (sum_all - sum0) / w1;
      var = (w0 / total) * (w1 / total) * (mu0 - mu1) * (mu0 - mu1);
    }
    if (var > best_var) {
      best_var = var;
      best_t = t;
    }
  }
  return best_t;
}

/// Binarize with the Otsu threshold: values above t become 255, the rest 0.
inline RasterImage binarize_otsu(const RasterImage& gray) {
  const int t = otsu_threshold(gray);
  RasterImage out = gray;
  for (std::uint8_t& v : out.pixels()) v = v > t ? 255 : 0;
  return out;
}

/// Bilinear resize with corner-aligned sampling: source position
/// dst * (in-1)/(out-1), degenerating to 0 when either extent is 1. Values
/// are rounded half-up and clamped.
inline RasterImage resize_bilinear(const RasterImage& img, int target_w, int target_h) {
  if (target_w <= 0 || target_h <= 0) {
    throw ConfigError("resize: target dimensions must be positive");
  }
  if (target_w == img.width() && target_h == img.height()) return img;

  RasterImage out(target_w, target_h, img.channels());
  const double scale_x =
      target_w > 1 ? static_cast<double>(img.width() - 1) / (target_w - 1) : 0.0;
  const double scale_y =
      target_h > 1 ? static_cast<double>(img.height() - 1) / (target_h - 1) : 0.0;

  for (int oy = 0; oy < target_h; ++oy) {
    const double sy = oy * scale_y;
    const int y0 = static_cast<int>(std::floor(sy));
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double fy = sy - y0;
    for (int ox = 0; ox < target_w; ++ox) {
      const double sx = ox * scale_x;
      const int x0 = static_cast<int>(std::floor(sx));
      const int x1 = std::min(x0 + 1, img.width() - 1);
      const double fx = sx - x0;
      for (int c = 0; c < img.channels(); ++c) {
        const double v = (1.0 - fx) * (1.0 - fy) * img.at(x0, y0, c) +
                         fx * (1.0 - fy) * img.at(x1, y0, c) +
                         (1.0 - fx) * fy * img.at(x0, y1, c) +
                         fx * fy * img.at(x1, y1, c);
        out.at(ox, oy, c) = clamp_to_byte(v);
      }
    }
  }
  return out;
}

/// Multiplies every sample by `factor`, rounding half-up and clamping.
inline RasterImage adjust_brightness(const RasterImage& img, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw ConfigError("brightness factor must be finite and positive");
  }
  RasterImage out = img;
  for (std::uint8_t& v : out.pixels()) v = clamp_to_byte(v * factor);
  return out;
}

}  // namespace fuselab
