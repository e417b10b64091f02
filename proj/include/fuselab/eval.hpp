// Copyright 2026 The Fuselab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fuselab/data_model.hpp"
#include "fuselab/detail/json_util.hpp"
#include "fuselab/error.hpp"
#include "fuselab/geometry.hpp"

namespace fuselab {

struct EvalConfig {
  std::vector<double> iou_thresholds = {0.5};
  double score_threshold = 0.5;

  void validate() const {
    if (iou_thresholds.empty()) throw ConfigError("eval: need at least one IoU threshold");
    double prev = 0.0;
    for (double t : iou_thresholds) {
      if (!(t > 0.0) || !(t <= 1.0)) throw ConfigError("eval: IoU thresholds must be in (0, 1]");
      if (t <= prev) throw ConfigError("eval: IoU thresholds must be strictly increasing");
      prev = t;
    }
    if (!(score_threshold >= 0.0) || !(score_threshold <= 1.0)) {
      throw ConfigError("eval: score threshold must be in [0, 1]");
    }
  }

  /// The ten thresholds 0.50, 0.55, ..., 0.95.
  static std::vector<double> coco_range() {
    std::vector<double> thresholds;
    thresholds.reserve(10);
    for (int i = 0; i < 10; ++i) thresholds.push_back((50 + 5 * i) / 100.0);
    return thresholds;
  }

  static EvalConfig coco(double score_threshold = 0.5) {
    return EvalConfig{coco_range(), score_threshold};
  }
};

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Marks ratios whose denominator was zero and were assigned the vacuous
/// value 1.0 by convention.
struct VacuousFlags {
  bool precision = false;
  bool recall = false;
  bool accuracy = false;

  friend bool operator==(const VacuousFlags&, const VacuousFlags&) = default;
};

struct ConfusionMetrics {
  ConfusionCounts instance;     // tn stays 0: undefined for instance detection
  ConfusionCounts image_level;  // a defect-free board correctly passed is a tn
  double precision = 1.0;       // instance-level
  double recall = 1.0;          // instance-level
  double accuracy = 1.0;        // image-level
  VacuousFlags vacuous;

  friend bool operator==(const ConfusionMetrics&, const ConfusionMetrics&) = default;
};

struct EvalReport {
  std::vector<double> iou_thresholds;
  double score_threshold = 0.5;
  // ap[threshold][class]; absent when the class has no ground truth
  std::vector<std::array<std::optional<double>, kNumDefectClasses>> per_class_ap;
  std::vector<std::optional<double>> mean_ap_per_threshold;
  std::optional<double> map_50;
  std::optional<double> map_50_95;
  ConfusionMetrics confusion;
  std::vector<std::string> classes_without_gt;
  std::optional<double> mean_runtime_per_image;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

namespace detail {

// Order detections by descending score, ties by smaller x_min then input
// position; keeps matching and PR sweeps reproducible.
inline std::vector<std::size_t> score_order(const std::vector<const Detection*>& dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dets[a]->score != dets[b]->score) return dets[a]->score > dets[b]->score;
    if (dets[a]->bbox.x_min != dets[b]->bbox.x_min) {
      return dets[a]->bbox.x_min < dets[b]->bbox.x_min;
    }
    return a < b;
  });
  return order;
}

}  // namespace detail

/// Greedy one-to-one matching on a single image: detections are visited in
/// descending score order (ties: x_min, then input order) and each consumes
/// the unmatched ground-truth object of the same class (when class_aware)
/// with the highest IoU at or above `iou_threshold`. Returns, per input
/// detection position, the matched ground-truth index or nullopt.
inline std::vector<std::optional<std::size_t>> match_detections(
    const std::vector<const Detection*>& dets, const std::vector<const GroundTruthObject*>& gts,
    double iou_threshold, bool class_aware = true) {
  std::vector<std::optional<std::size_t>> matches(dets.size());
  std::vector<bool> consumed(gts.size(), false);

  for (std::size_t pos : detail::score_order(dets)) {
    const Detection& det = *dets[pos];
    double best_iou = 0.0;
    std::optional<std::size_t> best;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (consumed[g]) continue;
      if (class_aware && gts[g]->cls != det.cls) continue;
      const double overlap = iou(det.bbox, gts[g]->bbox);
      if (overlap < iou_threshold) continue;
      if (overlap > best_iou) {
        best_iou = overlap;
        best = g;
      }
    }
    if (best) {
      consumed[*best] = true;
      matches[pos] = best;
    }
  }
  return matches;
}

/// Average precision for one class over a whole dataset: greedy matching per
/// image, a global PR sweep in score order, and the area under the precision
/// envelope (all-points interpolation). Returns nullopt when the class has
/// no ground truth (excluded from mAP), 0 when ground truth exists but no
/// detection does.
inline std::optional<double> average_precision(const std::vector<Detection>& detections,
                                               const DatasetIndex& gt, DefectClass cls,
                                               double iou_threshold) {
  struct Entry {
    double score;
    double x_min;
    std::size_t input_pos;
    bool is_tp;
  };

  std::map<std::string, std::vector<const GroundTruthObject*>> gts_by_image;
  std::size_t num_gt = 0;
  for (const ImageRecord& rec : gt.images()) {
    for (const GroundTruthObject& obj : rec.objects) {
      if (obj.cls != cls) continue;
      gts_by_image[rec.id].push_back(&obj);
      ++num_gt;
    }
  }
  if (num_gt == 0) return std::nullopt;

  std::map<std::string, std::vector<const Detection*>> dets_by_image;
  std::map<std::string, std::vector<std::size_t>> positions_by_image;
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const Detection& det = detections[i];
    if (det.cls != cls) continue;
    dets_by_image[det.image_id].push_back(&det);
    positions_by_image[det.image_id].push_back(i);
    entries.push_back({det.score, det.bbox.x_min, i, false});
  }
  if (entries.empty()) return 0.0;

  std::map<std::size_t, bool> tp_by_position;
  for (const auto& [image_id, dets] : dets_by_image) {
    static const std::vector<const GroundTruthObject*> kNone;
    auto git = gts_by_image.find(image_id);
    const auto& gts = git == gts_by_image.end() ? kNone : git->second;
    const auto matches = match_detections(dets, gts, iou_threshold);
    for (std::size_t k = 0; k < matches.size(); ++k) {
      tp_by_position[positions_by_image.at(image_id)[k]] = matches[k].has_value();
    }
  }
  for (Entry& e : entries) e.is_tp = tp_by_position.at(e.input_pos);

  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.x_min != b.x_min) return a.x_min < b.x_min;
    return a.input_pos < b.input_pos;
  });

  std::vector<double> precision(entries.size());
  std::vector<double> recall(entries.size());
  std::size_t cum_tp = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].is_tp) ++cum_tp;
    precision[i] = static_cast<double>(cum_tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(cum_tp) / static_cast<double>(num_gt);
  }

  // precision envelope: p(r) = max precision at any recall >= r
  std::vector<double> envelope(entries.size());
  double running = 0.0;
  for (std::size_t i = entries.size(); i-- > 0;) {
    running = std::max(running, precision[i]);
    envelope[i] = running;
  }

  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (recall[i] > prev_recall) {
      ap += (recall[i] - prev_recall) * envelope[i];
      prev_recall = recall[i];
    }
  }
  return ap;
}

/// Arithmetic mean over classes with defined AP.
inline double mean_ap(const std::array<std::optional<double>, kNumDefectClasses>& per_class) {
  double sum = 0.0;
  int defined = 0;
  for (const auto& ap : per_class) {
    if (ap) {
      sum += *ap;
      ++defined;
    }
  }
  if (defined == 0) throw EvalError("mean AP undefined: no class has ground truth");
  return sum / defined;
}

inline std::array<std::optional<double>, kNumDefectClasses> per_class_ap(
    const std::vector<Detection>& detections, const DatasetIndex& gt, double iou_threshold) {
  std::array<std::optional<double>, kNumDefectClasses> aps;
  for (DefectClass cls : kAllDefectClasses) {
    aps[class_index(cls)] = average_precision(detections, gt, cls, iou_threshold);
  }
  return aps;
}

/// Mean of mean_ap over the ten COCO-style thresholds 0.50..0.95.
inline double map_range(const std::vector<Detection>& detections, const DatasetIndex& gt) {
  const auto thresholds = EvalConfig::coco_range();
  double sum = 0.0;
  for (double t : thresholds) sum += mean_ap(per_class_ap(detections, gt, t));
  return sum / static_cast<double>(thresholds.size());
}

/// Confusion counts and the derived accuracy/precision/recall. Detections
/// below the score threshold are discarded first. Instance-level counts come
/// from greedy matching at IoU 0.5 (TN undefined, kept 0); precision and
/// recall are instance-level. Accuracy is image-level, where a defect-free
/// image with no surviving detection counts as a true negative. Ratios with
/// a zero denominator take the value 1.0 and are flagged.
inline ConfusionMetrics confusion_metrics(const std::vector<Detection>& detections,
                                          const DatasetIndex& gt, double score_threshold) {
  constexpr double kInstanceIou = 0.5;
  ConfusionMetrics result;

  std::map<std::string, std::vector<const Detection*>> dets_by_image;
  for (const Detection& det : detections) {
    if (det.score < score_threshold) continue;
    if (!gt.find(det.image_id)) {
      throw ValidationError("detection references unknown image \"" + det.image_id + "\"");
    }
    dets_by_image[det.image_id].push_back(&det);
  }

  for (const ImageRecord& rec : gt.images()) {
    std::vector<const GroundTruthObject*> gts;
    gts.reserve(rec.objects.size());
    for (const GroundTruthObject& obj : rec.objects) gts.push_back(&obj);

    static const std::vector<const Detection*> kNoDets;
    auto dit = dets_by_image.find(rec.id);
    const auto& dets = dit == dets_by_image.end() ? kNoDets : dit->second;

    const auto matches = match_detections(dets, gts, kInstanceIou);
    std::size_t matched = 0;
    for (const auto& m : matches) {
      if (m) ++matched;
    }
    result.instance.tp += matched;
    result.instance.fp += dets.size() - matched;
    result.instance.fn += gts.size() - matched;

    const bool actual_positive = !rec.objects.empty();
    const bool predicted_positive = !dets.empty();
    if (actual_positive && predicted_positive) ++result.image_level.tp;
    if (actual_positive && !predicted_positive) ++result.image_level.fn;
    if (!actual_positive && predicted_positive) ++result.image_level.fp;
    if (!actual_positive && !predicted_positive) ++result.image_level.tn;
  }

  const auto ratio = [](std::uint64_t num, std::uint64_t den, bool& vacuous) {
    if (den == 0) {
      vacuous = true;
      return 1.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  result.precision =
      ratio(result.instance.tp, result.instance.tp + result.instance.fp, result.vacuous.precision);
  result.recall =
      ratio(result.instance.tp, result.instance.tp + result.instance.fn, result.vacuous.recall);
  const auto& img = result.image_level;
  result.accuracy =
      ratio(img.tp + img.tn, img.tp + img.tn + img.fp + img.fn, result.vacuous.accuracy);
  return result;
}

/// Full evaluation of one detection set against ground truth.
inline EvalReport evaluate(const DatasetIndex& gt, const DetectionSet& detections,
                           const EvalConfig& config) {
  config.validate();
  detections.validate();
  for (const Detection& det : detections.detections) {
    if (!gt.find(det.image_id)) {
      throw ValidationError("detection references unknown image \"" + det.image_id + "\"");
    }
  }

  EvalReport report;
  report.iou_thresholds = config.iou_thresholds;
  report.score_threshold = config.score_threshold;

  for (double t : config.iou_thresholds) {
    report.per_class_ap.push_back(per_class_ap(detections.detections, gt, t));
    const auto& aps = report.per_class_ap.back();
    const bool any_defined =
        std::any_of(aps.begin(), aps.end(), [](const auto& ap) { return ap.has_value(); });
    report.mean_ap_per_threshold.push_back(
        any_defined ? std::optional<double>(mean_ap(aps)) : std::nullopt);
  }

  for (std::size_t i = 0; i < config.iou_thresholds.size(); ++i) {
    if (config.iou_thresholds[i] == 0.5) report.map_50 = report.mean_ap_per_threshold[i];
  }
  if (config.iou_thresholds == EvalConfig::coco_range()) {
    bool all_defined = true;
    double sum = 0.0;
    for (const auto& m : report.mean_ap_per_threshold) {
      if (!m) {
        all_defined = false;
        break;
      }
      sum += *m;
    }
    if (all_defined) report.map_50_95 = sum / 10.0;
  }

  report.confusion = confusion_metrics(detections.detections, gt, config.score_threshold);

  const auto counts = gt.class_counts();
  for (int c = 0; c < kNumDefectClasses; ++c) {
    if (counts[c] == 0) report.classes_without_gt.emplace_back(kDefectClassNames[c]);
  }

  if (detections.has_runtime()) {
    double sum = 0.0;
    for (const auto& [image_id, seconds] : detections.runtime_seconds) sum += seconds;
    report.mean_runtime_per_image = sum / static_cast<double>(detections.runtime_seconds.size());
  }
  return report;
}

/// Per-model mean runtime per image; models without runtime data are
/// omitted rather than treated as errors.
struct RuntimeSummary {
  std::vector<std::pair<std::string, double>> per_model_mean;
  double sum_of_means = 0.0;

  /// The ensemble processes every image through every base model, so its
  /// per-image cost is the sum of the base means plus the fusion pass.
  [[nodiscard]] double ensemble_estimate(double fusion_seconds_per_image = 0.0) const {
    return sum_of_means + fusion_seconds_per_image;
  }
};

inline RuntimeSummary aggregate_runtime(const std::vector<DetectionSet>& sets) {
  RuntimeSummary summary;
  for (const DetectionSet& set : sets) {
    if (!set.has_runtime()) continue;
    double sum = 0.0;
    for (const auto& [image_id, seconds] : set.runtime_seconds) sum += seconds;
    const double mean = sum / static_cast<double>(set.runtime_seconds.size());
    summary.per_model_mean.emplace_back(set.model_id, mean);
    summary.sum_of_means += mean;
  }
  return summary;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

inline detail::ordered_json report_to_json(const EvalReport& report) {
  detail::ordered_json doc;
  doc["format"] = "fuselab-eval-report/1";
  doc["iou_thresholds"] = report.iou_thresholds;
  doc["score_threshold"] = report.score_threshold;

  auto& ap_blocks = doc["ap_per_iou"] = detail::ordered_json::array();
  for (std::size_t i = 0; i < report.iou_thresholds.size(); ++i) {
    detail::ordered_json block;
    block["iou"] = report.iou_thresholds[i];
    auto& per_class = block["per_class_ap"] = detail::ordered_json::object();
    for (int c = 0; c < kNumDefectClasses; ++c) {
      const auto& ap = report.per_class_ap[i][c];
      per_class[std::string(kDefectClassNames[c])] =
          ap ? detail::ordered_json(*ap) : detail::ordered_json(nullptr);
    }
    block["mean_ap"] = report.mean_ap_per_threshold[i]
                           ? detail::ordered_json(*report.mean_ap_per_threshold[i])
                           : detail::ordered_json(nullptr);
    ap_blocks.push_back(std::move(block));
  }

  doc["map_50"] = report.map_50 ? detail::ordered_json(*report.map_50) : nullptr;
  if (report.map_50_95) doc["map_50_95"] = *report.map_50_95;

  const auto counts_json = [](const ConfusionCounts& counts) {
    detail::ordered_json j;
    j["tp"] = counts.tp;
    j["fp"] = counts.fp;
    j["fn"] = counts.fn;
    j["tn"] = counts.tn;
    return j;
  };
  doc["instance_confusion"] = counts_json(report.confusion.instance);
  doc["image_confusion"] = counts_json(report.confusion.image_level);
  doc["precision"] = report.confusion.precision;
  doc["recall"] = report.confusion.recall;
  doc["accuracy"] = report.confusion.accuracy;
  doc["vacuous"] = {{"precision", report.confusion.vacuous.precision},
                    {"recall", report.confusion.vacuous.recall},
                    {"accuracy", report.confusion.vacuous.accuracy}};
  doc["classes_without_gt"] = report.classes_without_gt;
  if (report.mean_runtime_per_image) {
    doc["mean_runtime_per_image"] = *report.mean_runtime_per_image;
  }
  return doc;
}

/// Per-class AP table, one row per class, one column per IoU threshold.
inline std::string report_to_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "class";
  for (double t : report.iou_thresholds) {
    out << ",ap@" << t;
  }
  out << "\n";
  for (int c = 0; c < kNumDefectClasses; ++c) {
    out << kDefectClassNames[c];
    for (std::size_t i = 0; i < report.iou_thresholds.size(); ++i) {
      out << ",";
      if (report.per_class_ap[i][c]) out << *report.per_class_ap[i][c];
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace fuselab
