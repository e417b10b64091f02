// Copyright 2026 The Fuselab Authors
// SPDX-License-Identifier: Apache-2.0

#include "fuselab/eval.hpp"

#include <catch2/catch.hpp>

#include "fuselab/rng.hpp"
#include "../common/oracles.hpp"
#include "test_util.hpp"

using namespace fuselab;
using fuselab_test::ApInstance;
using fuselab_test::make_detection;
using fuselab_test::make_record;

namespace {

DatasetIndex gt_from_instance(const ApInstance& instance, DefectClass cls) {
  std::map<std::string, std::vector<GroundTruthObject>> objects;
  std::set<std::string> image_ids;
  for (const auto& [image_id, box] : instance.ground_truth) {
    objects[image_id].push_back({cls, box});
    image_ids.insert(image_id);
  }
  for (const auto& det : instance.detections) image_ids.insert(det.image_id);
  std::vector<ImageRecord> records;
  for (const std::string& id : image_ids) {
    records.push_back(make_record(id, 1000, 1000, objects.count(id) ? objects[id] :
                                  std::vector<GroundTruthObject>{}));
  }
  return DatasetIndex(std::move(records));
}

ApInstance random_instance(CounterRng& rng, int max_dets = 6, int max_gts = 4) {
  ApInstance instance;
  const int num_gts = 1 + static_cast<int>(rng.bounded(max_gts));
  const int num_dets = static_cast<int>(rng.bounded(max_dets + 1));
  const int num_images = 1 + static_cast<int>(rng.bounded(2));
  const auto image_of = [&](int k) { return "img" + std::to_string(k % num_images); };

  for (int g = 0; g < num_gts; ++g) {
    const double x = rng.uniform(0, 900);
    const double y = rng.uniform(0, 900);
    instance.ground_truth.emplace_back(
        image_of(g), BoundingBox{x, y, x + rng.uniform(10, 90), y + rng.uniform(10, 90)});
  }
  for (int d = 0; d < num_dets; ++d) {
    Detection det;
    det.image_id = image_of(static_cast<int>(rng.bounded(num_gts)));
    det.cls = DefectClass::spur;
    det.model_id = "m";
    det.score = rng.next_unit();
    if (rng.next_unit() < 0.7 && !instance.ground_truth.empty()) {
      // near a ground-truth box: jitter its corners
      const auto& [gt_image, gt_box] = instance.ground_truth[rng.bounded(num_gts)];
      det.image_id = gt_image;
      const double dx = rng.uniform(-8, 8);
      const double dy = rng.uniform(-8, 8);
      det.bbox = {gt_box.x_min + dx, gt_box.y_min + dy, gt_box.x_max + dx, gt_box.y_max + dy};
    } else {
      const double x = rng.uniform(0, 900);
      const double y = rng.uniform(0, 900);
      det.bbox = {x, y, x + rng.uniform(10, 90), y + rng.uniform(10, 90)};
    }
    instance.detections.push_back(std::move(det));
  }
  return instance;
}

const BoundingBox kBoxA{0, 0, 10, 10};
const BoundingBox kBoxB{100, 100, 110, 110};
const BoundingBox kFarAway{500, 500, 560, 560};

}  // namespace

TEST_CASE("matching pairs a perfect detection with its ground truth") {
  const Detection det = make_detection("img", DefectClass::spur, kBoxA, 0.9, "m");
  const GroundTruthObject gt{DefectClass::spur, kBoxA};
  const auto matches = match_detections({&det}, {&gt}, 0.5);
  REQUIRE(matches.size() == 1);
  CHECK(matches[0] == 0);
}

TEST_CASE("greedy matching consumes a ground truth only once") {
  const Detection first = make_detection("img", DefectClass::spur, kBoxA, 0.9, "m");
  const Detection second = make_detection("img", DefectClass::spur, kBoxA, 0.8, "m");
  const GroundTruthObject gt{DefectClass::spur, kBoxA};
  const auto matches = match_detections({&first, &second}, {&gt}, 0.5);
  CHECK(matches[0] == 0);
  CHECK_FALSE(matches[1].has_value());
}

TEST_CASE("class-aware matching rejects a class mismatch") {
  const Detection det = make_detection("img", DefectClass::spur, kBoxA, 0.9, "m");
  const GroundTruthObject gt{DefectClass::short_circuit, kBoxA};
  const auto matches = match_detections({&det}, {&gt}, 0.5);
  CHECK_FALSE(matches[0].has_value());
  const auto class_blind = match_detections({&det}, {&gt}, 0.5, false);
  CHECK(class_blind[0] == 0);
}

TEST_CASE("average precision of one perfect detection is one") {
  ApInstance instance;
  instance.ground_truth.emplace_back("img", kBoxA);
  instance.detections.push_back(make_detection("img", DefectClass::spur, kBoxA, 0.9, "m"));
  const DatasetIndex gt = gt_from_instance(instance, DefectClass::spur);
  const auto ap = average_precision(instance.detections, gt, DefectClass::spur, 0.5);
  REQUIRE(ap.has_value());
  CHECK(*ap == 1.0);
}

TEST_CASE("average precision hand case: tp fp tp over two ground truths") {
  ApInstance instance;
  instance.ground_truth.emplace_back("img", kBoxA);
  instance.ground_truth.emplace_back("img", kBoxB);
  instance.detections.push_back(make_detection("img", DefectClass::spur, kBoxA, 0.9, "m"));
  instance.detections.push_back(make_detection("img", DefectClass::spur, kFarAway, 0.8, "m"));
  instance.detections.push_back(make_detection("img", DefectClass::spur, kBoxB, 0.7, "m"));

  const DatasetIndex gt = gt_from_instance(instance, DefectClass::spur);
  const auto ap = average_precision(instance.detections, gt, DefectClass::spur, 0.5);
  REQUIRE(ap.has_value());
  // PR points (1.0, r=.5), (.5, r=.5), (2/3, r=1): 0.5*1 + 0.5*(2/3)
  CHECK(*ap == Approx(5.0 / 6.0).margin(1e-12));
  CHECK(*ap == Approx(fuselab_test::ap_cutoff_oracle(instance, 0.5)).margin(1e-12));
}

TEST_CASE("average precision is zero with ground truth but no detections") {
  ApInstance instance;
  instance.ground_truth.emplace_back("img", kBoxA);
  const DatasetIndex gt = gt_from_instance(instance, DefectClass::spur);
  const auto ap = average_precision({}, gt, DefectClass::spur, 0.5);
  REQUIRE(ap.has_value());
  CHECK(*ap == 0.0);
}

TEST_CASE("average precision is undefined without ground truth") {
  const DatasetIndex gt{{make_record("img", 100, 100)}};
  const std::vector<Detection> dets = {make_detection("img", DefectClass::spur, kBoxA, 0.9, "m")};
  CHECK_FALSE(average_precision(dets, gt, DefectClass::spur, 0.5).has_value());
}

TEST_CASE("average precision matches the cutoff oracle on random instances") {
  CounterRng rng(79);
  for (int trial = 0; trial < 150; ++trial) {
    const ApInstance instance = random_instance(rng);
    const DatasetIndex gt = gt_from_instance(instance, DefectClass::spur);
    const double threshold = 0.5;
    const auto ap = average_precision(instance.detections, gt, DefectClass::spur, threshold);
    REQUIRE(ap.has_value());
    const double oracle = fuselab_test::ap_cutoff_oracle(instance, threshold);
    CHECK(*ap == Approx(oracle).margin(1e-12));
  }
}

TEST_CASE("ap is invariant under monotone score transforms") {
  CounterRng rng(83);
  for (int trial = 0; trial < 25; ++trial) {
    ApInstance instance = random_instance(rng);
    const DatasetIndex gt = gt_from_instance(instance, DefectClass::spur);
    const auto before = average_precision(instance.detections, gt, DefectClass::spur, 0.5);
    for (Detection& det : instance.detections) det.score = 0.1 + det.score * 0.5;
    const auto after = average_precision(instance.detections, gt, DefectClass::spur, 0.5);
    CHECK(*before == Approx(*after).margin(1e-12));
  }
}

TEST_CASE("appending a lowest-ranked false positive never raises ap") {
  CounterRng rng(89);
  for (int trial = 0; trial < 25; ++trial) {
    ApInstance instance = random_instance(rng);
    const DatasetIndex gt = gt_from_instance(instance, DefectClass::spur);
    const auto before = average_precision(instance.detections, gt, DefectClass::spur, 0.5);
    double lowest = 1.0;
    for (const auto& det : instance.detections) lowest = std::min(lowest, det.score);
    instance.detections.push_back(
        make_detection("img0", DefectClass::spur, kFarAway, lowest / 2, "m"));
    const auto after = average_precision(instance.detections, gt, DefectClass::spur, 0.5);
    CHECK(*after <= *before + 1e-12);
  }
}

TEST_CASE("mean_ap averages defined classes and errors when none exist") {
  std::array<std::optional<double>, kNumDefectClasses> aps;
  CHECK_THROWS_AS(mean_ap(aps), EvalError);
  aps[0] = 1.0;
  aps[3] = 0.5;
  CHECK(mean_ap(aps) == Approx(0.75));
  for (auto& ap : aps) ap = 0.37;
  CHECK(mean_ap(aps) == Approx(0.37));
}

TEST_CASE("map over the coco range counts thresholds up to the match quality") {
  // IoU of det vs gt is exactly 75/125 = 0.6: matches at 0.50, 0.55, 0.60.
  std::vector<ImageRecord> records = {
      make_record("img", 100, 100, {{DefectClass::spur, {0, 0, 10, 10}}})};
  const DatasetIndex gt{std::move(records)};
  const std::vector<Detection> dets = {
      make_detection("img", DefectClass::spur, {0, 2.5, 10, 12.5}, 0.9, "m")};
  CHECK(iou(dets[0].bbox, gt.images()[0].objects[0].bbox) == Approx(0.6));
  CHECK(map_range(dets, gt) == Approx(0.3).margin(1e-12));

  const std::vector<Detection> perfect = {
      make_detection("img", DefectClass::spur, {0, 0, 10, 10}, 0.9, "m")};
  CHECK(map_range(perfect, gt) == 1.0);
  CHECK(map_range({}, gt) == 0.0);
}

TEST_CASE("map range equals the mean of the ten single-threshold maps") {
  CounterRng rng(97);
  const ApInstance instance = random_instance(rng, 12, 6);
  const DatasetIndex gt = gt_from_instance(instance, DefectClass::spur);
  double sum = 0.0;
  for (double t : EvalConfig::coco_range()) {
    sum += mean_ap(per_class_ap(instance.detections, gt, t));
  }
  CHECK(map_range(instance.detections, gt) == Approx(sum / 10.0).margin(1e-12));
}

TEST_CASE("confusion metrics reproduce the accuracy hand case") {
  // 93 true-positive images, 2 true negatives, 3 false positives, 2 false
  // negatives at image level: accuracy (93+2)/100 = 0.95.
  std::vector<ImageRecord> records;
  std::vector<Detection> dets;
  int next = 0;
  const auto add_image = [&](bool with_gt, bool with_det) {
    const std::string id = "img" + std::to_string(next++);
    records.push_back(make_record(
        id, 100, 100,
        with_gt ? std::vector<GroundTruthObject>{{DefectClass::spur, kBoxA}}
                : std::vector<GroundTruthObject>{}));
    if (with_det) dets.push_back(make_detection(id, DefectClass::spur, kBoxA, 0.9, "m"));
  };
  for (int i = 0; i < 93; ++i) add_image(true, true);
  for (int i = 0; i < 2; ++i) add_image(false, false);
  for (int i = 0; i < 3; ++i) add_image(false, true);
  for (int i = 0; i < 2; ++i) add_image(true, false);

  const ConfusionMetrics metrics = confusion_metrics(dets, DatasetIndex{records}, 0.5);
  CHECK(metrics.image_level == ConfusionCounts{93, 3, 2, 2});
  CHECK(metrics.accuracy == Approx(0.95));
  // instance level: TP+FN equals ground-truth count, TP+FP equals detections
  CHECK(metrics.instance.tp + metrics.instance.fn == 95);
  CHECK(metrics.instance.tp + metrics.instance.fp == 96);
  CHECK(metrics.instance.tn == 0);
}

TEST_CASE("confusion metrics reproduce the precision hand case") {
  // 8 matched detections + 2 stray ones: precision 0.8
  std::vector<ImageRecord> records;
  std::vector<Detection> dets;
  for (int i = 0; i < 8; ++i) {
    const std::string id = "ok" + std::to_string(i);
    records.push_back(make_record(id, 100, 100, {{DefectClass::spur, kBoxA}}));
    dets.push_back(make_detection(id, DefectClass::spur, kBoxA, 0.9, "m"));
  }
  for (int i = 0; i < 2; ++i) {
    const std::string id = "empty" + std::to_string(i);
    records.push_back(make_record(id, 100, 100));
    dets.push_back(make_detection(id, DefectClass::spur, kBoxA, 0.9, "m"));
  }
  const ConfusionMetrics metrics = confusion_metrics(dets, DatasetIndex{records}, 0.5);
  CHECK(metrics.instance.tp == 8);
  CHECK(metrics.instance.fp == 2);
  CHECK(metrics.precision == Approx(0.8));
  CHECK(metrics.recall == Approx(1.0));
}

TEST_CASE("an all-negative world is perfectly accurate by convention") {
  std::vector<ImageRecord> records;
  for (int i = 0; i < 10; ++i) records.push_back(make_record("clean" + std::to_string(i), 64, 64));
  const ConfusionMetrics metrics = confusion_metrics({}, DatasetIndex{records}, 0.5);
  CHECK(metrics.image_level.tn == 10);
  CHECK(metrics.accuracy == 1.0);
  CHECK(metrics.precision == 1.0);
  CHECK(metrics.recall == 1.0);
  CHECK(metrics.vacuous.precision);
  CHECK(metrics.vacuous.recall);
  CHECK_FALSE(metrics.vacuous.accuracy);
}

TEST_CASE("score threshold discards low detections before counting") {
  std::vector<ImageRecord> records = {make_record("img", 100, 100)};
  const std::vector<Detection> dets = {
      make_detection("img", DefectClass::spur, kBoxA, 0.49, "m")};
  const ConfusionMetrics metrics = confusion_metrics(dets, DatasetIndex{records}, 0.5);
  CHECK(metrics.image_level.tn == 1);
  CHECK(metrics.instance.fp == 0);
}

TEST_CASE("runtime aggregation averages per model and omits missing data") {
  DetectionSet with_runtime;
  with_runtime.model_id = "m1";
  with_runtime.runtime_seconds = {{"a", 1.0}, {"b", 3.0}};
  DetectionSet without;
  without.model_id = "m2";

  const RuntimeSummary summary = aggregate_runtime({with_runtime, without});
  REQUIRE(summary.per_model_mean.size() == 1);
  CHECK(summary.per_model_mean[0].first == "m1");
  CHECK(summary.per_model_mean[0].second == Approx(2.0));
  CHECK(summary.sum_of_means == Approx(2.0));
  CHECK(summary.ensemble_estimate(0.25) == Approx(2.25));

  CHECK(aggregate_runtime({without}).per_model_mean.empty());
}

TEST_CASE("evaluate produces a consistent report") {
  std::vector<ImageRecord> records = {
      make_record("img", 100, 100, {{DefectClass::spur, kBoxA}}),
      make_record("clean", 100, 100)};
  const DatasetIndex gt{std::move(records)};
  DetectionSet dets;
  dets.model_id = "m";
  dets.detections.push_back(make_detection("img", DefectClass::spur, kBoxA, 0.9, "m"));
  dets.runtime_seconds = {{"img", 0.5}, {"clean", 1.5}};

  const EvalReport report = evaluate(gt, dets, EvalConfig{});
  REQUIRE(report.map_50.has_value());
  CHECK(*report.map_50 == 1.0);
  CHECK_FALSE(report.map_50_95.has_value());  // singleton threshold list
  CHECK(report.confusion.image_level.tp == 1);
  CHECK(report.confusion.image_level.tn == 1);
  CHECK(report.mean_runtime_per_image == Approx(1.0));
  CHECK(report.classes_without_gt.size() == kNumDefectClasses - 1);

  const EvalReport coco = evaluate(gt, dets, EvalConfig::coco());
  REQUIRE(coco.map_50_95.has_value());
  CHECK(*coco.map_50_95 == 1.0);

  DetectionSet unknown = dets;
  unknown.detections[0].image_id = "ghost";
  CHECK_THROWS_AS(evaluate(gt, unknown, EvalConfig{}), ValidationError);
}

TEST_CASE("eval config validation") {
  EvalConfig config;
  config.iou_thresholds = {0.5, 0.5};
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.iou_thresholds = {0.0};
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.iou_thresholds = {};
  CHECK_THROWS_AS(config.validate(), ConfigError);
  CHECK(EvalConfig::coco_range().size() == 10);
  CHECK(EvalConfig::coco_range().front() == 0.5);
  CHECK(EvalConfig::coco_range().back() == 0.95);
}
