// Copyright 2026 The Fuselab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fuselab/data_model.hpp"
#include "fuselab/dataset_io.hpp"
#include "fuselab/detail/json_util.hpp"
#include "fuselab/error.hpp"
#include "fuselab/image.hpp"
#include "fuselab/png_io.hpp"

namespace fuselab {

struct PreprocessConfig {
  int target_width = 600;
  int target_height = 600;
  bool binarize = false;

  void validate() const {
    if (target_width <= 0 || target_height <= 0) {
      throw ConfigError("preprocess: target size must be positive");
    }
  }
};

/// Accepts `{"size": 600, "binarize": false}`, mirroring the CLI flags.
inline PreprocessConfig preprocess_config_from_json(const detail::ordered_json& doc,
                                                    const std::string& where) {
  PreprocessConfig config;
  if (auto it = doc.find("size"); it != doc.end()) {
    if (!it->is_number_integer()) throw SchemaError(where + ": \"size\" must be an integer");
    config.target_width = config.target_height = it->get<int>();
  }
  if (auto it = doc.find("binarize"); it != doc.end()) {
    if (!it->is_boolean()) throw SchemaError(where + ": \"binarize\" must be a boolean");
    config.binarize = it->get<bool>();
  }
  config.validate();
  return config;
}

struct PreprocessFailure {
  std::string image_id;
  std::string message;
};

struct PreprocessResult {
  DatasetIndex dataset;
  std::vector<PreprocessFailure> failures;
};

namespace detail {

inline std::string sanitize_file_stem(const std::string& id) {
  std::string out;
  out.reserve(id.size());
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    out.push_back(ok ? c : '_');
  }
  return out.empty() ? std::string("image") : out;
}

}  // namespace detail

/// Normalizes every image: grayscale conversion (3-channel inputs), optional
/// Otsu binarization, bilinear resize to the target size with ground-truth
/// boxes rescaled by the same per-axis ratios. Unreadable images are skipped
/// and reported; the pipeline continues.
inline PreprocessResult preprocess_dataset(const DatasetIndex& input,
                                           const PreprocessConfig& config,
                                           const std::string& out_dir) {
  namespace fs = std::filesystem;
  config.validate();
  fs::create_directories(fs::path(out_dir) / "images");

  PreprocessResult result;
  std::vector<ImageRecord> records;
  records.reserve(input.size());

  for (const ImageRecord& rec : input.images()) {
    try {
      RasterImage img = read_png(rec.path);
      if (img.width() != rec.width || img.height() != rec.height) {
        throw ValidationError("file is " + std::to_string(img.width()) + "x" +
                              std::to_string(img.height()) + " but the record declares " +
                              std::to_string(rec.width) + "x" + std::to_string(rec.height));
      }
      if (img.channels() == 3) img = to_grayscale(img);
      if (config.binarize) img = binarize_otsu(img);
      img = resize_bilinear(img, config.target_width, config.target_height);

      const double sx = static_cast<double>(config.target_width) / rec.width;
      const double sy = static_cast<double>(config.target_height) / rec.height;

      ImageRecord out_rec;
      out_rec.id = rec.id;
      out_rec.width = config.target_width;
      out_rec.height = config.target_height;
      const fs::path out_path =
          fs::path(out_dir) / "images" / (detail::sanitize_file_stem(rec.id) + ".png");
      out_rec.path = out_path.string();
      for (const GroundTruthObject& obj : rec.objects) {
        const BoundingBox& b = obj.bbox;
        out_rec.objects.push_back(
            {obj.cls, BoundingBox{b.x_min * sx, b.y_min * sy, b.x_max * sx, b.y_max * sy}});
      }

      write_png(out_path.string(), img);
      records.push_back(std::move(out_rec));
    } catch (const Error& e) {
      result.failures.push_back({rec.id, e.what()});
    }
  }

  result.dataset = DatasetIndex(std::move(records));
  return result;
}

}  // namespace fuselab
