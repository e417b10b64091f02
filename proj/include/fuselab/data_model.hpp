// Copyright 2026 The Fuselab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fuselab/defect_class.hpp"
#include "fuselab/error.hpp"
#include "fuselab/geometry.hpp"

namespace fuselab {

/// A labeled defect instance inside one image.
struct GroundTruthObject {
  DefectClass cls = DefectClass::missing_hole;
  BoundingBox bbox;

  friend bool operator==(const GroundTruthObject&, const GroundTruthObject&) = default;
};

/// One annotated image. `objects` may be empty: defect-free boards are real
/// data and are what image-level true negatives are counted on.
struct ImageRecord {
  std::string id;
  std::string path;
  int width = 0;
  int height = 0;
  std::vector<GroundTruthObject> objects;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

/// Immutable, validated collection of annotated images. Construction checks
/// every invariant once; afterwards concurrent readers are safe.
class DatasetIndex {
 public:
  DatasetIndex() = default;

  explicit DatasetIndex(std::vector<ImageRecord> images) : images_(std::move(images)) {
    for (std::size_t i = 0; i < images_.size(); ++i) {
      const ImageRecord& rec = images_[i];
      if (rec.id.empty()) {
        throw ValidationError("image #" + std::to_string(i) + " has an empty id");
      }
      if (rec.width <= 0 || rec.height <= 0) {
        throw ValidationError("image \"" + rec.id + "\": width and height must be positive");
      }
      if (!index_by_id_.emplace(rec.id, i).second) {
        throw ValidationError("duplicate image id \"" + rec.id + "\"");
      }
      for (const GroundTruthObject& obj : rec.objects) {
        if (!obj.bbox.valid()) {
          throw ValidationError("image \"" + rec.id + "\": invalid bounding box");
        }
        if (obj.bbox.x_min < 0 || obj.bbox.y_min < 0 ||
            obj.bbox.x_max > static_cast<double>(rec.width) ||
            obj.bbox.y_max > static_cast<double>(rec.height)) {
          throw ValidationError("image \"" + rec.id + "\": bounding box exceeds image bounds");
        }
      }
    }
  }

  [[nodiscard]] const std::vector<ImageRecord>& images() const { return images_; }
  [[nodiscard]] std::size_t size() const { return images_.size(); }
  [[nodiscard]] bool empty() const { return images_.empty(); }

  [[nodiscard]] const ImageRecord* find(std::string_view id) const {
    auto it = index_by_id_.find(std::string(id));
    return it == index_by_id_.end() ? nullptr : &images_[it->second];
  }

  /// Instance count per defect class, recomputed from the records so it can
  /// never drift out of sync.
  [[nodiscard]] std::array<std::size_t, kNumDefectClasses> class_counts() const {
    std::array<std::size_t, kNumDefectClasses> counts{};
    for (const ImageRecord& rec : images_) {
      for (const GroundTruthObject& obj : rec.objects) {
        ++counts[class_index(obj.cls)];
      }
    }
    return counts;
  }

  [[nodiscard]] std::size_t total_objects() const {
    std::size_t n = 0;
    for (const ImageRecord& rec : images_) n += rec.objects.size();
    return n;
  }

  friend bool operator==(const DatasetIndex& a, const DatasetIndex& b) {
    return a.images_ == b.images_;
  }

 private:
  std::vector<ImageRecord> images_;
  std::unordered_map<std::string, std::size_t> index_by_id_;
};

/// One model's claim about one image.
struct Detection {
  std::string image_id;
  DefectClass cls = DefectClass::missing_hole;
  BoundingBox bbox;
  double score = 0.0;
  std::string model_id;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// All detections one model produced over a dataset, with optional wall-time
/// bookkeeping per image.
struct DetectionSet {
  std::string model_id;
  std::vector<Detection> detections;
  std::map<std::string, double> runtime_seconds;  // empty when not measured

  [[nodiscard]] bool has_runtime() const { return !runtime_seconds.empty(); }

  /// Every detection must carry the set-level model id and a score in [0,1].
  void validate() const {
    for (std::size_t i = 0; i < detections.size(); ++i) {
      const Detection& det = detections[i];
      if (det.model_id != model_id) {
        throw ValidationError("detection #" + std::to_string(i) + " carries model \"" +
                              det.model_id + "\" inside set for model \"" + model_id + "\"");
      }
      if (!(det.score >= 0.0 && det.score <= 1.0)) {
        throw ValidationError("detection #" + std::to_string(i) + " on image \"" +
                              det.image_id + "\": score must be in [0, 1]");
      }
      if (!det.bbox.valid()) {
        throw ValidationError("detection #" + std::to_string(i) + " on image \"" +
                              det.image_id + "\": invalid bounding box");
      }
    }
  }

  friend bool operator==(const DetectionSet&, const DetectionSet&) = default;
};

}  // namespace fuselab
