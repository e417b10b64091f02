// Copyright 2026 The Fuselab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fuselab/data_model.hpp"
#include "fuselab/dataset_io.hpp"
#include "fuselab/detail/json_util.hpp"
#include "fuselab/error.hpp"
#include "fuselab/geometry.hpp"

namespace fuselab {

inline constexpr const char* kEnsembleConfigFormat = "fuselab-ensemble-config/1";
inline constexpr const char* kEnsembleModelId = "ensemble";

/// Parameters of the weighted consensus vote: per-model weights on the
/// simplex, the IoU gate for cross-model box matching, the acceptance
/// threshold applied to the consensus score, and an optional class-aware NMS
/// pass over the accepted output (off by default: every base-model box is
/// kept, trading duplicates for zero information loss).
struct EnsembleConfig {
  std::vector<std::pair<std::string, double>> model_weights;  // insertion order preserved
  double match_iou = 0.5;
  double accept_threshold = 0.25;
  std::optional<double> nms_threshold;

  void validate() const {
    if (model_weights.empty()) {
      throw ConfigError("ensemble config needs at least one model weight");
    }
    double sum = 0.0;
    for (const auto& [model_id, weight] : model_weights) {
      if (model_id.empty()) throw ConfigError("ensemble config has an empty model id");
      if (!(weight >= 0.0) || !std::isfinite(weight)) {
        throw ConfigError("weight for model \"" + model_id + "\" must be non-negative");
      }
      sum += weight;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ConfigError("model weights must sum to 1 (got " + std::to_string(sum) + ")");
    }
    if (!(match_iou > 0.0) || !(match_iou <= 1.0)) {
      throw ConfigError("match_iou must be in (0, 1]");
    }
    if (!(accept_threshold >= 0.0) || !(accept_threshold <= 1.0)) {
      throw ConfigError("accept_threshold must be in [0, 1]");
    }
    if (nms_threshold && (!(*nms_threshold > 0.0) || !(*nms_threshold <= 1.0))) {
      throw ConfigError("nms threshold must be in (0, 1]");
    }
  }

  [[nodiscard]] std::optional<double> weight_for(std::string_view model_id) const {
    for (const auto& [id, weight] : model_weights) {
      if (id == model_id) return weight;
    }
    return std::nullopt;
  }

  /// Builds a config from raw non-negative weights, renormalizing onto the
  /// simplex. Fusion output is invariant under this rescaling.
  static EnsembleConfig from_raw_weights(std::vector<std::pair<std::string, double>> raw,
                                         double match_iou = 0.5, double accept = 0.25,
                                         std::optional<double> nms = std::nullopt) {
    double sum = 0.0;
    for (const auto& [model_id, weight] : raw) {
      if (!(weight >= 0.0) || !std::isfinite(weight)) {
        throw ConfigError("weight for model \"" + model_id + "\" must be non-negative");
      }
      sum += weight;
    }
    if (!(sum > 0.0)) throw ConfigError("at least one model weight must be positive");
    for (auto& [model_id, weight] : raw) weight /= sum;
    EnsembleConfig config{std::move(raw), match_iou, accept, nms};
    config.validate();
    return config;
  }

  static EnsembleConfig uniform(const std::vector<std::string>& model_ids,
                                double match_iou = 0.5, double accept = 0.25,
                                std::optional<double> nms = std::nullopt) {
    std::vector<std::pair<std::string, double>> raw;
    raw.reserve(model_ids.size());
    for (const std::string& id : model_ids) raw.emplace_back(id, 1.0);
    return from_raw_weights(std::move(raw), match_iou, accept, nms);
  }
};

/// Cross-model evidence gathered around one anchor detection: for each model
/// and candidate class, the best matched confidence.
struct SupportTable {
  std::vector<std::string> model_ids;  // ensemble order
  // scores[model][class]: best score of a matching box, absent when none.
  std::vector<std::array<std::optional<double>, kNumDefectClasses>> scores;
  std::vector<DefectClass> candidate_classes;  // canonical order

  [[nodiscard]] std::optional<double> score_for(std::size_t model_pos, DefectClass cls) const {
    return scores[model_pos][class_index(cls)];
  }
};

struct SourceScore {
  std::string model_id;
  std::optional<double> score;  // absent when the model had no matching box

  friend bool operator==(const SourceScore&, const SourceScore&) = default;
};

/// One ensembled output box. The box geometry is the anchor's own; the class
/// and consensus come from the weighted vote across all models.
struct FusedDetection {
  std::string image_id;
  DefectClass cls = DefectClass::missing_hole;
  BoundingBox bbox;
  double consensus = 0.0;
  std::vector<SourceScore> sources;  // ensemble model order
  std::string anchor_model;

  friend bool operator==(const FusedDetection&, const FusedDetection&) = default;
};

namespace detail {

struct ImageDetectionViews {
  // per model position: detections of that model on one image
  std::vector<std::vector<const Detection*>> per_model;
};

inline SupportTable gather_support_views(const Detection& anchor,
                                         const std::vector<std::string>& model_ids,
                                         const ImageDetectionViews& views,
                                         double match_iou) {
  SupportTable table;
  table.model_ids = model_ids;
  table.scores.resize(model_ids.size());

  std::array<bool, kNumDefectClasses> seen{};
  seen[class_index(anchor.cls)] = true;

  for (std::size_t m = 0; m < model_ids.size(); ++m) {
    if (model_ids[m] == anchor.model_id) {
      // The anchor supplies its own model's evidence.
      table.scores[m][class_index(anchor.cls)] = anchor.score;
      continue;
    }
    for (const Detection* det : views.per_model[m]) {
      if (iou(anchor.bbox, det->bbox) < match_iou) continue;
      auto& slot = table.scores[m][class_index(det->cls)];
      if (!slot || det->score > *slot) slot = det->score;
      seen[class_index(det->cls)] = true;
    }
  }
  for (int c = 0; c < kNumDefectClasses; ++c) {
    if (seen[c]) table.candidate_classes.push_back(static_cast<DefectClass>(c));
  }
  return table;
}

}  // namespace detail

/// Collects per-model, per-class support for an anchor box: for every other
/// model, the maximum confidence among its detections on the same image
/// whose IoU with the anchor reaches `match_iou`; the anchor's own model
/// contributes exactly the anchor's class and score. The candidate class set
/// is restricted to classes observed among matches plus the anchor's class.
inline SupportTable gather_support(const Detection& anchor,
                                   const std::vector<DetectionSet>& sets,
                                   double match_iou) {
  std::vector<std::string> model_ids;
  detail::ImageDetectionViews views;
  for (const DetectionSet& set : sets) {
    model_ids.push_back(set.model_id);
    auto& view = views.per_model.emplace_back();
    for (const Detection& det : set.detections) {
      if (det.image_id == anchor.image_id) view.push_back(&det);
    }
  }
  return detail::gather_support_views(anchor, model_ids, views, match_iou);
}

/// Weighted consensus score for one candidate class: s = sum_m w_m * p_m(c),
/// with p_m(c) = 0 for models without a matching box of that class.
inline double consensus_score(const SupportTable& support, DefectClass cls,
                              const EnsembleConfig& config) {
  double s = 0.0;
  for (std::size_t m = 0; m < support.model_ids.size(); ++m) {
    const auto weight = config.weight_for(support.model_ids[m]);
    if (!weight) {
      throw ConfigError("model \"" + support.model_ids[m] +
                        "\" has no weight in the ensemble config");
    }
    if (const auto score = support.score_for(m, cls)) s += *weight * *score;
  }
  return s;
}

/// Hybrid-voting fusion. Step 1 keeps every box from every base model as an
/// anchor (no box is discarded before scoring). Step 2 votes the anchor's
/// class: the candidate class with the highest weighted consensus wins (ties
/// break in canonical class order) and the anchor survives iff its consensus
/// reaches the acceptance threshold. Optional class-aware NMS then prunes
/// duplicates per image. Output is sorted by (image_id, consensus desc,
/// x_min) and is byte-deterministic for identical inputs and config.
inline std::vector<FusedDetection> fuse(const std::vector<DetectionSet>& sets,
                                        const EnsembleConfig& config,
                                        const DatasetIndex* validate_images = nullptr) {
  config.validate();
  if (sets.empty()) throw ConfigError("fuse: at least one detection set is required");

  std::vector<std::string> model_ids;
  for (const DetectionSet& set : sets) {
    set.validate();
    if (!config.weight_for(set.model_id)) {
      throw ConfigError("model \"" + set.model_id + "\" has no weight in the ensemble config");
    }
    for (const std::string& seen : model_ids) {
      if (seen == set.model_id) {
        throw ConfigError("duplicate detection set for model \"" + set.model_id + "\"");
      }
    }
    model_ids.push_back(set.model_id);
  }
  if (validate_images) {
    for (const DetectionSet& set : sets) {
      for (const Detection& det : set.detections) {
        if (!validate_images->find(det.image_id)) {
          throw ValidationError("detection references unknown image \"" + det.image_id + "\"");
        }
      }
    }
  }

  // Group detections by image so support gathering touches one image only.
  std::unordered_map<std::string, detail::ImageDetectionViews> by_image;
  for (std::size_t m = 0; m < sets.size(); ++m) {
    for (const Detection& det : sets[m].detections) {
      auto& views = by_image[det.image_id];
      if (views.per_model.empty()) views.per_model.resize(sets.size());
      views.per_model[m].push_back(&det);
    }
  }

  std::vector<FusedDetection> fused;
  for (const DetectionSet& set : sets) {
    for (const Detection& anchor : set.detections) {
      const auto& views = by_image.at(anchor.image_id);
      const SupportTable support =
          detail::gather_support_views(anchor, model_ids, views, config.match_iou);

      DefectClass voted = support.candidate_classes.front();
      double best = -1.0;
      for (DefectClass cls : support.candidate_classes) {  // canonical order breaks ties
        const double s = consensus_score(support, cls, config);
        if (s > best) {
          best = s;
          voted = cls;
        }
      }
      if (best < config.accept_threshold) continue;

      FusedDetection out;
      out.image_id = anchor.image_id;
      out.cls = voted;
      out.bbox = anchor.bbox;
      out.consensus = best;
      out.anchor_model = anchor.model_id;
      for (std::size_t m = 0; m < support.model_ids.size(); ++m) {
        out.sources.push_back({support.model_ids[m], support.score_for(m, voted)});
      }
      fused.push_back(std::move(out));
    }
  }

  if (config.nms_threshold) {
    std::map<std::string, std::vector<std::size_t>> per_image;
    for (std::size_t i = 0; i < fused.size(); ++i) per_image[fused[i].image_id].push_back(i);

    std::vector<FusedDetection> deduped;
    deduped.reserve(fused.size());
    std::vector<bool> keep(fused.size(), false);
    for (const auto& [image_id, indices] : per_image) {
      std::vector<ScoredBox> candidates;
      candidates.reserve(indices.size());
      for (std::size_t i : indices) {
        candidates.push_back({fused[i].bbox, fused[i].consensus, class_index(fused[i].cls)});
      }
      for (std::size_t kept : nms_keep(candidates, *config.nms_threshold, true)) {
        keep[indices[kept]] = true;
      }
    }
    for (std::size_t i = 0; i < fused.size(); ++i) {
      if (keep[i]) deduped.push_back(std::move(fused[i]));
    }
    fused = std::move(deduped);
  }

  std::stable_sort(fused.begin(), fused.end(),
                   [](const FusedDetection& a, const FusedDetection& b) {
                     if (a.image_id != b.image_id) return a.image_id < b.image_id;
                     if (a.consensus != b.consensus) return a.consensus > b.consensus;
                     return a.bbox.x_min < b.bbox.x_min;
                   });
  return fused;
}

/// Projects fused output onto the plain detections model (score = consensus)
/// so the evaluator and the file formats apply unchanged.
inline DetectionSet to_detection_set(const std::vector<FusedDetection>& fused) {
  DetectionSet set;
  set.model_id = kEnsembleModelId;
  set.detections.reserve(fused.size());
  for (const FusedDetection& det : fused) {
    set.detections.push_back(
        {det.image_id, det.cls, det.bbox, det.consensus, kEnsembleModelId});
  }
  return set;
}

/// Native detections file with the ensemble extension fields "consensus",
/// "anchor_model" and "sources" per detection; the plain loader ignores them.
inline detail::ordered_json fused_to_json(const std::vector<FusedDetection>& fused) {
  detail::ordered_json doc;
  doc["format"] = kDetectionsFormat;
  doc["model"] = kEnsembleModelId;
  auto& dets = doc["detections"] = detail::ordered_json::array();
  for (const FusedDetection& det : fused) {
    detail::ordered_json jdet;
    jdet["image_id"] = det.image_id;
    jdet["class"] = std::string(to_string(det.cls));
    jdet["bbox"] = detail::bbox_to_json(det.bbox);
    jdet["score"] = det.consensus;
    jdet["consensus"] = det.consensus;
    jdet["anchor_model"] = det.anchor_model;
    auto& sources = jdet["sources"] = detail::ordered_json::array();
    for (const SourceScore& src : det.sources) {
      detail::ordered_json jsrc;
      jsrc["model"] = src.model_id;
      if (src.score) {
        jsrc["score"] = *src.score;
      } else {
        jsrc["score"] = nullptr;
      }
      sources.push_back(std::move(jsrc));
    }
    dets.push_back(std::move(jdet));
  }
  return doc;
}

inline void save_fused(const std::vector<FusedDetection>& fused, const std::string& path) {
  detail::write_text_file(path, fused_to_json(fused).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Ensemble config file
// ---------------------------------------------------------------------------

inline detail::ordered_json ensemble_config_to_json(const EnsembleConfig& config) {
  detail::ordered_json doc;
  doc["format"] = kEnsembleConfigFormat;
  auto& weights = doc["weights"] = detail::ordered_json::object();
  for (const auto& [model_id, weight] : config.model_weights) weights[model_id] = weight;
  doc["match_iou"] = config.match_iou;
  doc["accept_threshold"] = config.accept_threshold;
  doc["nms_threshold"] =
      config.nms_threshold ? detail::ordered_json(*config.nms_threshold) : nullptr;
  return doc;
}

inline EnsembleConfig ensemble_config_from_json(const detail::ordered_json& doc,
                                                const std::string& where) {
  detail::require_format(doc, kEnsembleConfigFormat, where);
  const auto& jweights = detail::require_field(doc, "weights", where);
  if (!jweights.is_object() || jweights.empty()) {
    throw SchemaError(where + ": \"weights\" must be a non-empty object");
  }
  EnsembleConfig config;
  for (const auto& [model_id, weight] : jweights.items()) {
    if (!weight.is_number()) throw SchemaError(where + ": weights must be numbers");
    config.model_weights.emplace_back(model_id, weight.get<double>());
  }
  config.match_iou = detail::require_number(doc, "match_iou", where);
  config.accept_threshold = detail::require_number(doc, "accept_threshold", where);
  if (auto it = doc.find("nms_threshold"); it != doc.end() && !it->is_null()) {
    if (!it->is_number()) throw SchemaError(where + ": nms_threshold must be a number or null");
    config.nms_threshold = it->get<double>();
  }
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return config;
}

inline EnsembleConfig load_ensemble_config(const std::string& path) {
  return ensemble_config_from_json(detail::parse_json_file(path), path);
}

inline void save_ensemble_config(const EnsembleConfig& config, const std::string& path) {
  detail::write_text_file(path, ensemble_config_to_json(config).dump(2) + "\n");
}

}  // namespace fuselab
