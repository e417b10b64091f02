// Copyright 2026 The Fuselab Authors
// SPDX-License-Identifier: Apache-2.0

#include "fuselab/geometry.hpp"

#include <catch2/catch.hpp>

#include "fuselab/rng.hpp"

using namespace fuselab;

namespace {

// Independent IoU oracle: count pixels of each integer-coordinate box on a
// grid and take the count ratio.
double iou_rasterized(const BoundingBox& a, const BoundingBox& b, int grid) {
  long in_a = 0, in_b = 0, in_both = 0;
  for (int y = 0; y < grid; ++y) {
    for (int x = 0; x < grid; ++x) {
      const bool pa = x >= a.x_min && x < a.x_max && y >= a.y_min && y < a.y_max;
      const bool pb = x >= b.x_min && x < b.x_max && y >= b.y_min && y < b.y_max;
      in_a += pa;
      in_b += pb;
      in_both += pa && pb;
    }
  }
  const long uni = in_a + in_b - in_both;
  return uni > 0 ? static_cast<double>(in_both) / static_cast<double>(uni) : 0.0;
}

BoundingBox random_int_box(CounterRng& rng, int grid) {
  const auto x0 = static_cast<double>(rng.bounded(grid - 1));
  const auto y0 = static_cast<double>(rng.bounded(grid - 1));
  const auto w = 1.0 + static_cast<double>(rng.bounded(grid - static_cast<int>(x0) - 1));
  const auto h = 1.0 + static_cast<double>(rng.bounded(grid - static_cast<int>(y0) - 1));
  return {x0, y0, x0 + w, y0 + h};
}

BoundingBox random_box(CounterRng& rng, double extent) {
  const double x0 = rng.uniform(0.0, extent - 1.0);
  const double y0 = rng.uniform(0.0, extent - 1.0);
  const double w = rng.uniform(0.5, extent - x0);
  const double h = rng.uniform(0.5, extent - y0);
  return {x0, y0, x0 + w, y0 + h};
}

}  // namespace

TEST_CASE("area of boxes") {
  CHECK(area({0, 0, 1, 1}) == 1.0);
  CHECK(area({0, 0, 10, 10}) == 100.0);
  CHECK(area({2.5, 0, 3.5, 4}) == 4.0);
}

TEST_CASE("bounding box validity") {
  CHECK(BoundingBox{0, 0, 1, 1}.valid());
  CHECK_FALSE(BoundingBox{0, 0, 0, 1}.valid());
  CHECK_FALSE(BoundingBox{1, 0, 0, 1}.valid());
  CHECK_FALSE(BoundingBox{0, 2, 1, 1}.valid());
}

TEST_CASE("iou identities") {
  const BoundingBox b{3, 4, 10, 12};
  CHECK(iou(b, b) == 1.0);
  CHECK(iou({0, 0, 1, 1}, {5, 5, 6, 6}) == 0.0);
  // intersection 25, union 175
  CHECK(iou({0, 0, 10, 10}, {5, 5, 15, 15}) == Approx(25.0 / 175.0).epsilon(1e-12));
}

TEST_CASE("iou is symmetric and bounded on random boxes") {
  CounterRng rng(7);
  for (int i = 0; i < 500; ++i) {
    const BoundingBox a = random_box(rng, 100.0);
    const BoundingBox b = random_box(rng, 100.0);
    const double ab = iou(a, b);
    CHECK(ab == iou(b, a));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
  }
}

TEST_CASE("iou matches the pixel rasterization oracle on an integer grid") {
  constexpr int kGrid = 64;
  CounterRng rng(11);
  for (int i = 0; i < 200; ++i) {
    const BoundingBox a = random_int_box(rng, kGrid);
    const BoundingBox b = random_int_box(rng, kGrid);
    CHECK(iou(a, b) == Approx(iou_rasterized(a, b, kGrid)).margin(1e-12));
  }
}

TEST_CASE("nms keeps the higher scored duplicate") {
  const std::vector<ScoredBox> boxes = {
      {{0, 0, 10, 10}, 0.9, 0},
      {{0, 0, 10, 10}, 0.8, 0},
  };
  const auto kept = nms_keep(boxes, 0.5, true);
  REQUIRE(kept == std::vector<std::size_t>{0});
}

TEST_CASE("nms keeps disjoint boxes") {
  const std::vector<ScoredBox> boxes = {
      {{0, 0, 10, 10}, 0.9, 0},
      {{50, 50, 60, 60}, 0.8, 0},
  };
  CHECK(nms_keep(boxes, 0.5, true).size() == 2);
}

TEST_CASE("nms greedy chain keeps first and third") {
  // #2 overlaps #1 (IoU 0.6), #3 overlaps #2 only (IoU 0.6).
  // Boxes 10 wide; x-offset 2.5 gives IoU 7.5/12.5 = 0.6.
  const std::vector<ScoredBox> boxes = {
      {{0.0, 0, 10.0, 10}, 0.9, 0},
      {{2.5, 0, 12.5, 10}, 0.8, 0},
      {{5.0, 0, 15.0, 10}, 0.7, 0},
  };
  CHECK(iou(boxes[0].box, boxes[1].box) == Approx(0.6));
  CHECK(iou(boxes[1].box, boxes[2].box) == Approx(0.6));
  CHECK(iou(boxes[0].box, boxes[2].box) < 0.5);
  const auto kept = nms_keep(boxes, 0.5, true);
  REQUIRE(kept == std::vector<std::size_t>{0, 2});
}

TEST_CASE("class-aware nms only suppresses within a class") {
  const std::vector<ScoredBox> boxes = {
      {{0, 0, 10, 10}, 0.9, 0},
      {{0, 0, 10, 10}, 0.8, 1},
  };
  CHECK(nms_keep(boxes, 0.5, true).size() == 2);
  CHECK(nms_keep(boxes, 0.5, false).size() == 1);
}

TEST_CASE("nms rejects invalid thresholds") {
  CHECK_THROWS_AS(nms_keep({}, 0.0, true), ConfigError);
  CHECK_THROWS_AS(nms_keep({}, 1.5, true), ConfigError);
}

TEST_CASE("nms output is a subset, conflict-free and idempotent") {
  CounterRng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ScoredBox> boxes;
    const int n = 2 + static_cast<int>(rng.bounded(12));
    for (int i = 0; i < n; ++i) {
      boxes.push_back({random_box(rng, 60.0), rng.next_unit(),
                       static_cast<int>(rng.bounded(3))});
    }
    const double threshold = 0.3 + 0.5 * rng.next_unit();
    const auto kept = nms_keep(boxes, threshold, true);

    for (std::size_t i = 0; i < kept.size(); ++i) {
      REQUIRE(kept[i] < boxes.size());
      for (std::size_t j = i + 1; j < kept.size(); ++j) {
        if (boxes[kept[i]].label != boxes[kept[j]].label) continue;
        CHECK(iou(boxes[kept[i]].box, boxes[kept[j]].box) < threshold);
      }
    }

    const std::vector<ScoredBox> retained = nms(boxes, threshold, true);
    const std::vector<ScoredBox> again = nms(retained, threshold, true);
    REQUIRE(again.size() == retained.size());
    for (std::size_t i = 0; i < retained.size(); ++i) {
      CHECK(again[i].box == retained[i].box);
      CHECK(again[i].score == retained[i].score);
      CHECK(again[i].label == retained[i].label);
    }
  }
}
