// Copyright 2026 The Fuselab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fuselab/data_model.hpp"
#include "fuselab/detail/json_util.hpp"
#include "fuselab/error.hpp"
#include "fuselab/rng.hpp"

namespace fuselab {

inline constexpr const char* kSimProfilesFormat = "fuselab-sim-profiles/1";

struct BetaParams {
  double alpha = 1.0;
  double beta = 1.0;
};

/// Error characteristics of one synthetic detector. Defaults give a fairly
/// strong model: every object found, no localization noise, confident true
/// positives (Beta(8,2), mean 0.8) and hesitant false positives (Beta(3,7),
/// mean 0.3).
struct SimModelProfile {
  std::string model_id;
  double miss_rate = 0.0;        // probability a gt object is not emitted
  double fp_per_image = 0.0;     // expected false positives per image (Poisson)
  double loc_sigma = 0.0;        // Gaussian jitter on each box corner, pixels
  double confusion_rate = 0.0;   // probability a tp gets a wrong class
  BetaParams tp_score{8.0, 2.0};
  BetaParams fp_score{3.0, 7.0};
  double per_image_runtime = 0.0;

  void validate() const {
    if (model_id.empty()) throw ConfigError("sim profile: model id must not be empty");
    for (auto [name, rate] : {std::pair{"miss_rate", miss_rate},
                              std::pair{"confusion_rate", confusion_rate}}) {
      if (!(rate >= 0.0 && rate <= 1.0)) {
        throw ConfigError(std::string("sim profile \"") + model_id + "\": " + name +
                          " must be in [0, 1]");
      }
    }
    if (!(fp_per_image >= 0.0) || !std::isfinite(fp_per_image)) {
      throw ConfigError("sim profile \"" + model_id + "\": fp_per_image must be >= 0");
    }
    if (!(loc_sigma >= 0.0) || !std::isfinite(loc_sigma)) {
      throw ConfigError("sim profile \"" + model_id + "\": loc_sigma must be finite and >= 0");
    }
    for (auto [name, params] : {std::pair{"tp_score", tp_score},
                                std::pair{"fp_score", fp_score}}) {
      if (!(params.alpha > 0.0) || !(params.beta > 0.0)) {
        throw ConfigError(std::string("sim profile \"") + model_id + "\": " + name +
                          " Beta parameters must be positive");
      }
    }
    if (!(per_image_runtime >= 0.0)) {
      throw ConfigError("sim profile \"" + model_id + "\": per_image_runtime must be >= 0");
    }
  }
};

namespace detail {

// Jittered corners, clamped to the frame and reordered; falls back to the
// original coordinates if the jitter collapsed the box onto an edge.
inline BoundingBox jitter_box(const BoundingBox& box, double sigma, double width,
                              double height, CounterRng& rng) {
  const double x1 = std::clamp(box.x_min + rng.normal(0.0, sigma), 0.0, width);
  const double x2 = std::clamp(box.x_max + rng.normal(0.0, sigma), 0.0, width);
  const double y1 = std::clamp(box.y_min + rng.normal(0.0, sigma), 0.0, height);
  const double y2 = std::clamp(box.y_max + rng.normal(0.0, sigma), 0.0, height);
  BoundingBox out{std::min(x1, x2), std::min(y1, y2), std::max(x1, x2), std::max(y1, y2)};
  if (!out.valid()) return box;
  return out;
}

}  // namespace detail

/// Fabricates per-model detection sets from ground truth with controlled
/// error characteristics. Every (model, image) cell draws from its own
/// counter-based stream keyed by (seed, model_id, image_id), so per-model
/// output is independent of the other profiles and of iteration order.
/// Detections are assembled in (model, image, object) order.
inline std::vector<DetectionSet> simulate(const DatasetIndex& gt,
                                          const std::vector<SimModelProfile>& profiles,
                                          std::uint64_t seed) {
  if (profiles.empty()) throw ConfigError("simulate: at least one profile is required");
  for (const SimModelProfile& profile : profiles) profile.validate();

  std::vector<DetectionSet> sets;
  sets.reserve(profiles.size());

  for (const SimModelProfile& profile : profiles) {
    DetectionSet set;
    set.model_id = profile.model_id;
    const std::uint64_t model_key = fnv1a64(profile.model_id);

    for (const ImageRecord& rec : gt.images()) {
      CounterRng rng(seed, model_key, fnv1a64(rec.id));
      const auto width = static_cast<double>(rec.width);
      const auto height = static_cast<double>(rec.height);

      for (const GroundTruthObject& obj : rec.objects) {
        if (rng.next_unit() < profile.miss_rate) continue;

        Detection det;
        det.image_id = rec.id;
        det.model_id = profile.model_id;
        det.bbox = detail::jitter_box(obj.bbox, profile.loc_sigma, width, height, rng);
        det.cls = obj.cls;
        if (rng.next_unit() < profile.confusion_rate) {
          // uniform over the other seven classes
          const auto shift = 1 + rng.bounded(kNumDefectClasses - 1);
          det.cls = static_cast<DefectClass>(
              (class_index(obj.cls) + static_cast<int>(shift)) % kNumDefectClasses);
        }
        det.score = rng.beta(profile.tp_score.alpha, profile.tp_score.beta);
        set.detections.push_back(std::move(det));
      }

      const std::uint64_t false_positives = rng.poisson(profile.fp_per_image);
      for (std::uint64_t k = 0; k < false_positives; ++k) {
        const double w = std::min(rng.uniform(10.0, 100.0), width);
        const double h = std::min(rng.uniform(10.0, 100.0), height);
        const double x = rng.uniform(0.0, width - w);
        const double y = rng.uniform(0.0, height - h);
        Detection det;
        det.image_id = rec.id;
        det.model_id = profile.model_id;
        det.bbox = BoundingBox{x, y, x + w, y + h};
        det.cls = static_cast<DefectClass>(rng.bounded(kNumDefectClasses));
        det.score = rng.beta(profile.fp_score.alpha, profile.fp_score.beta);
        set.detections.push_back(std::move(det));
      }

      set.runtime_seconds[rec.id] = profile.per_image_runtime;
    }
    sets.push_back(std::move(set));
  }
  return sets;
}

// ---------------------------------------------------------------------------
// Profiles file
// ---------------------------------------------------------------------------

inline SimModelProfile sim_profile_from_json(const detail::ordered_json& j,
                                             const std::string& where) {
  SimModelProfile profile;
  profile.model_id = detail::require_string(j, "model", where);
  const auto number_or = [&](const char* key, double fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number()) {
      throw SchemaError(where + ": \"" + key + "\" must be a number");
    }
    return it->get<double>();
  };
  profile.miss_rate = number_or("miss_rate", profile.miss_rate);
  profile.fp_per_image = number_or("fp_per_image", profile.fp_per_image);
  profile.loc_sigma = number_or("loc_sigma", profile.loc_sigma);
  profile.confusion_rate = number_or("confusion_rate", profile.confusion_rate);
  profile.per_image_runtime = number_or("per_image_runtime", profile.per_image_runtime);

  const auto beta_or = [&](const char* key, BetaParams fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_object()) throw SchemaError(where + ": \"" + key + "\" must be an object");
    return BetaParams{detail::require_number(*it, "alpha", where),
                      detail::require_number(*it, "beta", where)};
  };
  profile.tp_score = beta_or("tp_score", profile.tp_score);
  profile.fp_score = beta_or("fp_score", profile.fp_score);

  try {
    profile.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return profile;
}

inline std::vector<SimModelProfile> sim_profiles_from_json(const detail::ordered_json& doc,
                                                           const std::string& where) {
  detail::require_format(doc, kSimProfilesFormat, where);
  const auto& jprofiles = detail::require_array(doc, "profiles", where);
  if (jprofiles.empty()) throw SchemaError(where + ": \"profiles\" must not be empty");
  std::vector<SimModelProfile> profiles;
  profiles.reserve(jprofiles.size());
  for (std::size_t i = 0; i < jprofiles.size(); ++i) {
    profiles.push_back(
        sim_profile_from_json(jprofiles[i], where + ": profiles[" + std::to_string(i) + "]"));
  }
  return profiles;
}

inline std::vector<SimModelProfile> load_sim_profiles(const std::string& path) {
  return sim_profiles_from_json(detail::parse_json_file(path), path);
}

inline detail::ordered_json sim_profiles_to_json(const std::vector<SimModelProfile>& profiles) {
  detail::ordered_json doc;
  doc["format"] = kSimProfilesFormat;
  auto& jprofiles = doc["profiles"] = detail::ordered_json::array();
  for (const SimModelProfile& profile : profiles) {
    detail::ordered_json j;
    j["model"] = profile.model_id;
    j["miss_rate"] = profile.miss_rate;
    j["fp_per_image"] = profile.fp_per_image;
    j["loc_sigma"] = profile.loc_sigma;
    j["confusion_rate"] = profile.confusion_rate;
    j["tp_score"] = {{"alpha", profile.tp_score.alpha}, {"beta", profile.tp_score.beta}};
    j["fp_score"] = {{"alpha", profile.fp_score.alpha}, {"beta", profile.fp_score.beta}};
    j["per_image_runtime"] = profile.per_image_runtime;
    jprofiles.push_back(std::move(j));
  }
  return doc;
}

}  // namespace fuselab
