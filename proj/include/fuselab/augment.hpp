// Copyright 2026 The Fuselab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fuselab/data_model.hpp"
#include "fuselab/error.hpp"
#include "fuselab/image.hpp"

namespace fuselab {

struct Rotate {
  int angle_degrees = 90;  // 90, 180 or 270
};
struct FlipHorizontal {};
struct FlipVertical {};
struct Brightness {
  double factor = 1.0;
};
struct Rescale {
  double factor = 1.0;
};

using AugmentOp = std::variant<Rotate, FlipHorizontal, FlipVertical, Brightness, Rescale>;

struct Augmented {
  RasterImage image;
  std::vector<GroundTruthObject> objects;
};

namespace detail {

// One clockwise quarter turn: corner (x, y) -> (H - y, x).
inline Augmented rotate90_once(const RasterImage& img,
                               const std::vector<GroundTruthObject>& objects) {
  const int w = img.width();
  const int h = img.height();
  Augmented out{RasterImage(h, w, img.channels()), {}};
  for (int y = 0; y < w; ++y) {
    for (int x = 0; x < h; ++x) {
      for (int c = 0; c < img.channels(); ++c) {
        out.image.at(x, y, c) = img.at(y, h - 1 - x, c);
      }
    }
  }
  out.objects.reserve(objects.size());
  for (const GroundTruthObject& obj : objects) {
    const BoundingBox& b = obj.bbox;
    out.objects.push_back(
        {obj.cls, BoundingBox{h - b.y_max, b.x_min, h - b.y_min, b.x_max}});
  }
  return out;
}

}  // namespace detail

/// Applies one augmentation operator to an image and its ground-truth boxes,
/// keeping the two consistent. Boxes stay in continuous coordinates; only
/// pixel values quantize.
inline Augmented apply_augment(const RasterImage& img,
                               const std::vector<GroundTruthObject>& objects,
                               const AugmentOp& op) {
  struct Visitor {
    const RasterImage& img;
    const std::vector<GroundTruthObject>& objects;

    Augmented operator()(const Rotate& rot) const {
      if (rot.angle_degrees != 90 && rot.angle_degrees != 180 && rot.angle_degrees != 270) {
        throw ConfigError("rotation angle must be 90, 180 or 270 degrees");
      }
      Augmented out{img, objects};
      for (int turns = rot.angle_degrees / 90; turns > 0; --turns) {
        out = detail::rotate90_once(out.image, out.objects);
      }
      return out;
    }

    Augmented operator()(FlipHorizontal) const {
      const int w = img.width();
      Augmented out{RasterImage(w, img.height(), img.channels()), {}};
      for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < w; ++x) {
          for (int c = 0; c < img.channels(); ++c) {
            out.image.at(x, y, c) = img.at(w - 1 - x, y, c);
          }
        }
      }
      for (const GroundTruthObject& obj : objects) {
        const BoundingBox& b = obj.bbox;
        out.objects.push_back({obj.cls, BoundingBox{w - b.x_max, b.y_min, w - b.x_min, b.y_max}});
      }
      return out;
    }

    Augmented operator()(FlipVertical) const {
      const int h = img.height();
      Augmented out{RasterImage(img.width(), h, img.channels()), {}};
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < img.width(); ++x) {
          for (int c = 0; c < img.channels(); ++c) {
            out.image.at(x, y, c) = img.at(x, h - 1 - y, c);
          }
        }
      }
      for (const GroundTruthObject& obj : objects) {
        const BoundingBox& b = obj.bbox;
        out.objects.push_back({obj.cls, BoundingBox{b.x_min, h - b.y_max, b.x_max, h - b.y_min}});
      }
      return out;
    }

    Augmented operator()(const Brightness& br) const {
      return Augmented{adjust_brightness(img, br.factor), objects};
    }

    Augmented operator()(const Rescale& rs) const {
      if (!(rs.factor > 0.0) || !std::isfinite(rs.factor)) {
        throw ConfigError("rescale factor must be finite and positive");
      }
      // ceil keeps every scaled box inside the resampled frame.
      const int new_w = static_cast<int>(std::ceil(img.width() * rs.factor));
      const int new_h = static_cast<int>(std::ceil(img.height() * rs.factor));
      Augmented out{resize_bilinear(img, new_w, new_h), {}};
      for (const GroundTruthObject& obj : objects) {
        const BoundingBox& b = obj.bbox;
        out.objects.push_back({obj.cls, BoundingBox{b.x_min * rs.factor, b.y_min * rs.factor,
                                                    b.x_max * rs.factor, b.y_max * rs.factor}});
      }
      return out;
    }
  };
  return std::visit(Visitor{img, objects}, op);
}

/// Parses a CLI op token: rot90 | rot180 | rot270 | flip_h | flip_v |
/// brightness:F | rescale:F.
inline AugmentOp parse_augment_op(std::string_view token) {
  if (token == "rot90") return Rotate{90};
  if (token == "rot180") return Rotate{180};
  if (token == "rot270") return Rotate{270};
  if (token == "flip_h") return FlipHorizontal{};
  if (token == "flip_v") return FlipVertical{};
  const auto parse_factor = [&](std::string_view text) {
    try {
      std::size_t used = 0;
      const double factor = std::stod(std::string(text), &used);
      if (used != text.size()) throw std::invalid_argument("trailing characters");
      return factor;
    } catch (const std::exception&) {
      throw ConfigError("invalid augment factor in \"" + std::string(token) + "\"");
    }
  };
  if (token.starts_with("brightness:")) {
    return Brightness{parse_factor(token.substr(11))};
  }
  if (token.starts_with("rescale:")) {
    return Rescale{parse_factor(token.substr(8))};
  }
  throw ConfigError("unknown augment op \"" + std::string(token) +
                    "\" (expected rot90|rot180|rot270|flip_h|flip_v|brightness:F|rescale:F)");
}

/// Filesystem-safe tag used to suffix augmented image ids.
inline std::string augment_op_tag(const AugmentOp& op) {
  struct Visitor {
    std::string operator()(const Rotate& r) const { return "rot" + std::to_string(r.angle_degrees); }
    std::string operator()(FlipHorizontal) const { return "flip_h"; }
    std::string operator()(FlipVertical) const { return "flip_v"; }
    std::string operator()(const Brightness& b) const { return "brightness_" + format(b.factor); }
    std::string operator()(const Rescale& r) const { return "rescale_" + format(r.factor); }
    static std::string format(double v) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%g", v);
      return buf;
    }
  };
  return std::visit(Visitor{}, op);
}

}  // namespace fuselab
