// Copyright 2026 The Fuselab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fuselab/data_model.hpp"
#include "fuselab/detail/json_util.hpp"
#include "fuselab/error.hpp"
#include "fuselab/png_io.hpp"

namespace fuselab {

inline constexpr const char* kDatasetFormat = "fuselab-dataset/1";
inline constexpr const char* kDetectionsFormat = "fuselab-detections/1";

namespace detail {

inline BoundingBox bbox_from_json(const ordered_json& arr, const std::string& where) {
  if (!arr.is_array() || arr.size() != 4) {
    throw SchemaError(where + ": bbox must be an array of 4 numbers");
  }
  for (const auto& v : arr) {
    if (!v.is_number()) throw SchemaError(where + ": bbox must contain only numbers");
  }
  BoundingBox box{arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>(),
                  arr[3].get<double>()};
  if (!box.valid()) {
    throw ValidationError(where + ": bbox must satisfy x_min < x_max and y_min < y_max");
  }
  return box;
}

inline ordered_json bbox_to_json(const BoundingBox& box) {
  return ordered_json::array({box.x_min, box.y_min, box.x_max, box.y_max});
}

inline DefectClass class_from_json(const ordered_json& j, const std::string& where) {
  const std::string raw = require_string(j, "class", where);
  if (auto cls = try_parse_defect_class(raw)) return *cls;
  throw ValidationError(where + ": unknown defect class \"" + raw + "\"");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Native dataset file
// ---------------------------------------------------------------------------

inline detail::ordered_json dataset_to_json(const DatasetIndex& index) {
  detail::ordered_json doc;
  doc["format"] = kDatasetFormat;
  auto& images = doc["images"] = detail::ordered_json::array();
  for (const ImageRecord& rec : index.images()) {
    detail::ordered_json jrec;
    jrec["id"] = rec.id;
    jrec["path"] = rec.path;
    jrec["width"] = rec.width;
    jrec["height"] = rec.height;
    auto& objects = jrec["objects"] = detail::ordered_json::array();
    for (const GroundTruthObject& obj : rec.objects) {
      detail::ordered_json jobj;
      jobj["class"] = std::string(to_string(obj.cls));
      jobj["bbox"] = detail::bbox_to_json(obj.bbox);
      objects.push_back(std::move(jobj));
    }
    images.push_back(std::move(jrec));
  }
  return doc;
}

inline DatasetIndex dataset_from_json(const detail::ordered_json& doc,
                                      const std::string& where) {
  detail::require_format(doc, kDatasetFormat, where);
  const auto& jimages = detail::require_array(doc, "images", where);

  std::vector<ImageRecord> records;
  records.reserve(jimages.size());
  for (std::size_t i = 0; i < jimages.size(); ++i) {
    const std::string ctx = where + ": images[" + std::to_string(i) + "]";
    const auto& jrec = jimages[i];
    if (!jrec.is_object()) throw SchemaError(ctx + ": must be an object");
    ImageRecord rec;
    rec.id = detail::require_string(jrec, "id", ctx);
    rec.path = detail::require_string(jrec, "path", ctx);
    rec.width = detail::require_int(jrec, "width", ctx);
    rec.height = detail::require_int(jrec, "height", ctx);
    const auto& jobjs = detail::require_array(jrec, "objects", ctx);
    for (std::size_t k = 0; k < jobjs.size(); ++k) {
      const std::string octx = ctx + ".objects[" + std::to_string(k) + "]";
      const auto& jobj = jobjs[k];
      if (!jobj.is_object()) throw SchemaError(octx + ": must be an object");
      GroundTruthObject obj;
      obj.cls = detail::class_from_json(jobj, octx);
      obj.bbox = detail::bbox_from_json(detail::require_field(jobj, "bbox", octx), octx);
      rec.objects.push_back(obj);
    }
    records.push_back(std::move(rec));
  }
  try {
    return DatasetIndex(std::move(records));
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

inline DatasetIndex load_dataset(const std::string& path) {
  return dataset_from_json(detail::parse_json_file(path), path);
}

inline void save_dataset(const DatasetIndex& index, const std::string& path) {
  detail::write_text_file(path, dataset_to_json(index).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Native detections file
// ---------------------------------------------------------------------------

inline detail::ordered_json detections_to_json(const DetectionSet& set) {
  detail::ordered_json doc;
  doc["format"] = kDetectionsFormat;
  doc["model"] = set.model_id;
  auto& dets = doc["detections"] = detail::ordered_json::array();
  for (const Detection& det : set.detections) {
    detail::ordered_json jdet;
    jdet["image_id"] = det.image_id;
    jdet["class"] = std::string(to_string(det.cls));
    jdet["bbox"] = detail::bbox_to_json(det.bbox);
    jdet["score"] = det.score;
    dets.push_back(std::move(jdet));
  }
  if (!set.runtime_seconds.empty()) {
    auto& runtimes = doc["runtime_seconds"] = detail::ordered_json::object();
    for (const auto& [image_id, seconds] : set.runtime_seconds) {
      runtimes[image_id] = seconds;
    }
  }
  return doc;
}

/// Unknown per-detection keys (e.g. the ensemble extensions "consensus" and
/// "sources") are ignored so fused output files load as plain detections.
inline DetectionSet detections_from_json(const detail::ordered_json& doc,
                                         const std::string& where) {
  detail::require_format(doc, kDetectionsFormat, where);
  DetectionSet set;
  set.model_id = detail::require_string(doc, "model", where);
  const auto& jdets = detail::require_array(doc, "detections", where);
  set.detections.reserve(jdets.size());
  for (std::size_t i = 0; i < jdets.size(); ++i) {
    const std::string ctx = where + ": detections[" + std::to_string(i) + "]";
    const auto& jdet = jdets[i];
    if (!jdet.is_object()) throw SchemaError(ctx + ": must be an object");
    Detection det;
    det.image_id = detail::require_string(jdet, "image_id", ctx);
    det.cls = detail::class_from_json(jdet, ctx);
    det.bbox = detail::bbox_from_json(detail::require_field(jdet, "bbox", ctx), ctx);
    det.score = detail::require_number(jdet, "score", ctx);
    det.model_id = set.model_id;
    set.detections.push_back(std::move(det));
  }
  if (auto it = doc.find("runtime_seconds"); it != doc.end()) {
    if (!it->is_object()) throw SchemaError(where + ": runtime_seconds must be an object");
    for (const auto& [image_id, seconds] : it->items()) {
      if (!seconds.is_number()) {
        throw SchemaError(where + ": runtime_seconds values must be numbers");
      }
      set.runtime_seconds[image_id] = seconds.get<double>();
    }
  }
  try {
    set.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  return set;
}

inline DetectionSet load_detections(const std::string& path) {
  return detections_from_json(detail::parse_json_file(path), path);
}

inline void save_detections(const DetectionSet& set, const std::string& path) {
  detail::write_text_file(path, detections_to_json(set).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// YOLO txt import
// ---------------------------------------------------------------------------

/// Imports OpenLabeling-style YOLO annotations: one `<stem>.txt` per
/// `<stem>.png`, each line `class_index x_center y_center w h` with
/// normalized coordinates. Boxes convert to corner-based pixels through the
/// image dimensions and clamp to the frame.
inline DatasetIndex import_yolo_txt(const std::string& image_dir,
                                    const std::string& label_dir,
                                    const std::map<int, DefectClass>& class_map) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(image_dir)) throw IoError("\"" + image_dir + "\" is not a directory");
  if (!fs::is_directory(label_dir)) throw IoError("\"" + label_dir + "\" is not a directory");

  std::vector<fs::path> label_files;
  for (const auto& entry : fs::directory_iterator(label_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      label_files.push_back(entry.path());
    }
  }
  std::sort(label_files.begin(), label_files.end());

  std::vector<ImageRecord> records;
  records.reserve(label_files.size());
  for (const fs::path& label_path : label_files) {
    const std::string stem = label_path.stem().string();
    const fs::path image_path = fs::path(image_dir) / (stem + ".png");
    if (!fs::exists(image_path)) {
      throw ValidationError("label file \"" + label_path.string() +
                            "\" has no matching image \"" + image_path.string() + "\"");
    }

    ImageRecord rec;
    rec.id = stem;
    rec.path = image_path.string();
    std::tie(rec.width, rec.height) = read_png_dimensions(image_path.string());

    std::ifstream in(label_path);
    if (!in) throw IoError("cannot open \"" + label_path.string() + "\" for reading");
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
      const std::string ctx = label_path.string() + ":" + std::to_string(line_no);

      std::istringstream fields(line);
      int class_index = 0;
      double xc = 0, yc = 0, w = 0, h = 0;
      std::string extra;
      if (!(fields >> class_index >> xc >> yc >> w >> h)) {
        throw ParseError(ctx + ": expected `class_index x_center y_center w h`");
      }
      if (fields >> extra) {
        throw ParseError(ctx + ": trailing field \"" + extra + "\"");
      }

      auto mapped = class_map.find(class_index);
      if (mapped == class_map.end()) {
        throw ValidationError(ctx + ": class index " + std::to_string(class_index) +
                              " is not in the class map");
      }
      for (double v : {xc, yc, w, h}) {
        if (!(v >= 0.0 && v <= 1.0)) {
          throw ValidationError(ctx + ": normalized values must be in [0, 1]");
        }
      }
      if (w <= 0.0 || h <= 0.0) {
        throw ValidationError(ctx + ": box width and height must be positive");
      }

      BoundingBox box;
      box.x_min = std::max(0.0, (xc - w / 2.0) * rec.width);
      box.y_min = std::max(0.0, (yc - h / 2.0) * rec.height);
      box.x_max = std::min(static_cast<double>(rec.width), (xc + w / 2.0) * rec.width);
      box.y_max = std::min(static_cast<double>(rec.height), (yc + h / 2.0) * rec.height);
      if (!box.valid()) {
        throw ValidationError(ctx + ": box degenerates after clamping to the frame");
      }
      rec.objects.push_back(GroundTruthObject{mapped->second, box});
    }
    records.push_back(std::move(rec));
  }
  return DatasetIndex(std::move(records));
}

}  // namespace fuselab
