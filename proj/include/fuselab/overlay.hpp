// Copyright 2026 The Fuselab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "fuselab/data_model.hpp"
#include "fuselab/detail/font5x7.hpp"
#include "fuselab/image.hpp"

namespace fuselab {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
};

inline constexpr std::array<Rgb, kNumDefectClasses> kClassPalette = {{
    {230, 25, 75},    // missing_hole
    {60, 180, 75},    // mouse_bite
    {255, 225, 25},   // open_circuit
    {0, 130, 200},    // short
    {245, 130, 48},   // spur
    {145, 30, 180},   // spurious_copper
    {70, 240, 240},   // pinhole
    {240, 50, 230},   // scratch
}};

namespace detail {

inline void put_pixel(RasterImage& img, int x, int y, Rgb color) {
  if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) return;
  img.at(x, y, 0) = color.r;
  img.at(x, y, 1) = color.g;
  img.at(x, y, 2) = color.b;
}

inline void fill_rect(RasterImage& img, int x0, int y0, int x1, int y1, Rgb color) {
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) put_pixel(img, x, y, color);
  }
}

inline void draw_rect_outline(RasterImage& img, const BoundingBox& box, Rgb color,
                              int thickness) {
  const int x0 = static_cast<int>(std::lround(box.x_min));
  const int y0 = static_cast<int>(std::lround(box.y_min));
  const int x1 = static_cast<int>(std::lround(box.x_max));
  const int y1 = static_cast<int>(std::lround(box.y_max));
  fill_rect(img, x0, y0, x1, y0 + thickness, color);               // top
  fill_rect(img, x0, y1 - thickness, x1, y1, color);               // bottom
  fill_rect(img, x0, y0, x0 + thickness, y1, color);               // left
  fill_rect(img, x1 - thickness, y0, x1, y1, color);               // right
}

inline void draw_text(RasterImage& img, int x, int y, const std::string& text, Rgb color,
                      int scale = 2) {
  int cursor = x;
  for (char c : text) {
    const Glyph5x7* glyph = find_glyph(c);
    if (glyph) {
      for (int row = 0; row < 7; ++row) {
        for (int col = 0; col < 5; ++col) {
          if (!(glyph->rows[row] & (1 << (4 - col)))) continue;
          fill_rect(img, cursor + col * scale, y + row * scale, cursor + (col + 1) * scale,
                    y + (row + 1) * scale, color);
        }
      }
    }
    cursor += 6 * scale;
  }
}

}  // namespace detail

inline RasterImage to_rgb(const RasterImage& img) {
  if (img.channels() == 3) return img;
  RasterImage out(img.width(), img.height(), 3);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const std::uint8_t v = img.at(x, y);
      out.at(x, y, 0) = v;
      out.at(x, y, 1) = v;
      out.at(x, y, 2) = v;
    }
  }
  return out;
}

/// Draws each detection's box, class name and score on a copy of the image,
/// colored by class, for human inspection of fused or raw detections.
inline RasterImage render_overlay(const RasterImage& base,
                                  const std::vector<const Detection*>& detections) {
  RasterImage canvas = to_rgb(base);
  constexpr int kScale = 2;
  constexpr int kTextHeight = 7 * kScale;
  for (const Detection* det : detections) {
    const Rgb color = kClassPalette[class_index(det->cls)];
    detail::draw_rect_outline(canvas, det->bbox, color, 2);

    char label[64];
    std::snprintf(label, sizeof(label), "%s %.2f", std::string(to_string(det->cls)).c_str(),
                  det->score);
    const int x = static_cast<int>(std::lround(det->bbox.x_min));
    int y = static_cast<int>(std::lround(det->bbox.y_min)) - kTextHeight - 2;
    if (y < 0) y = static_cast<int>(std::lround(det->bbox.y_min)) + 3;
    detail::draw_text(canvas, x, y, label, color, kScale);
  }
  return canvas;
}

}  // namespace fuselab
