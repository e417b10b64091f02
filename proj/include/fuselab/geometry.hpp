// Copyright 2026 The Fuselab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "fuselab/error.hpp"

namespace fuselab {

/// Axis-aligned rectangle in continuous pixel coordinates. Origin is the
/// image top-left corner, x grows rightward, y grows downward. Corners are
/// corner-based (not pixel-index inclusive), so a unit box has area 1.
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  [[nodiscard]] bool valid() const {
    return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
           std::isfinite(y_max) && x_min < x_max && y_min < y_max;
  }

  [[nodiscard]] double width() const { return x_max - x_min; }
  [[nodiscard]] double height() const { return y_max - y_min; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

inline double area(const BoundingBox& b) { return b.width() * b.height(); }

inline double intersection_area(const BoundingBox& a, const BoundingBox& b) {
  const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

/// Intersection over union. 0 for disjoint boxes, 1 for identical ones,
/// symmetric in its arguments.
inline double iou(const BoundingBox& a, const BoundingBox& b) {
  const double inter = intersection_area(a, b);
  const double uni = area(a) + area(b) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

/// One entry in a suppression pass: geometry, ranking score and a class
/// label. The label is an opaque integer; callers that suppress across
/// classes can pass any constant.
struct ScoredBox {
  BoundingBox box;
  double score = 0.0;
  int label = 0;
};

/// Greedy non-maximum suppression. Boxes are visited in descending score
/// order (ties: smaller x_min, then y_min, then input position) and a box is
/// dropped iff its IoU with an already retained box reaches `iou_threshold`
/// and, when `class_aware`, the labels match. Returns the retained input
/// positions in ascending order, so rerunning on the output is the identity.
inline std::vector<std::size_t> nms_keep(const std::vector<ScoredBox>& items,
                                         double iou_threshold, bool class_aware) {
  if (!(iou_threshold > 0.0) || !(iou_threshold <= 1.0)) {
    throw ConfigError("nms: iou_threshold must be in (0, 1], got " +
                      std::to_string(iou_threshold));
  }

  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t lhs, std::size_t rhs) {
    const ScoredBox& a = items[lhs];
    const ScoredBox& b = items[rhs];
    if (a.score != b.score) return a.score > b.score;
    if (a.box.x_min != b.box.x_min) return a.box.x_min < b.box.x_min;
    if (a.box.y_min != b.box.y_min) return a.box.y_min < b.box.y_min;
    return lhs < rhs;
  });

  std::vector<std::size_t> retained;
  retained.reserve(items.size());
  for (std::size_t idx : order) {
    bool suppressed = false;
    for (std::size_t kept : retained) {
      if (class_aware && items[kept].label != items[idx].label) continue;
      if (iou(items[kept].box, items[idx].box) >= iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) retained.push_back(idx);
  }
  std::sort(retained.begin(), retained.end());
  return retained;
}

/// Convenience overload returning the retained boxes themselves.
inline std::vector<ScoredBox> nms(const std::vector<ScoredBox>& items,
                                  double iou_threshold, bool class_aware) {
  std::vector<ScoredBox> out;
  for (std::size_t idx : nms_keep(items, iou_threshold, class_aware)) {
    out.push_back(items[idx]);
  }
  return out;
}

}  // namespace fuselab
