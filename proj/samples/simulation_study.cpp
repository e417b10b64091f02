// Copyright 2026 The Fuselab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Desk-scale ensemble study: simulate four imperfect detectors on a
// synthetic board set, tune the consensus weights on the data, and compare
// each single model's mAP@0.5 against the fused ensemble.

#include <cstdio>

#include "fuselab/fuselab.hpp"

using namespace fuselab;

namespace {

DatasetIndex make_boards(int count, std::uint64_t seed) {
  std::vector<ImageRecord> records;
  CounterRng rng(seed, fnv1a64("boards"));
  int cls = 0;
  for (int i = 0; i < count; ++i) {
    ImageRecord rec;
    rec.id = "board_" + std::to_string(i);
    rec.path = rec.id + ".png";
    rec.width = 600;
    rec.height = 600;
    const int objects = 2 + static_cast<int>(rng.bounded(3));
    for (int k = 0; k < objects; ++k) {
      const double x = rng.uniform(0, 500);
      const double y = rng.uniform(0, 500);
      rec.objects.push_back({static_cast<DefectClass>(cls++ % kNumDefectClasses),
                             {x, y, x + rng.uniform(30, 80), y + rng.uniform(30, 80)}});
    }
    records.push_back(std::move(rec));
  }
  return DatasetIndex(std::move(records));
}

}  // namespace

int main() {
  const DatasetIndex gt = make_boards(100, 1);

  std::vector<SimModelProfile> profiles(4);
  const double miss[4] = {0.10, 0.15, 0.20, 0.30};
  const double fp[4] = {0.5, 1.0, 1.0, 1.5};
  for (int m = 0; m < 4; ++m) {
    profiles[m].model_id = "net_" + std::to_string(m + 1);
    profiles[m].miss_rate = miss[m];
    profiles[m].fp_per_image = fp[m];
    profiles[m].loc_sigma = 2.0;
    profiles[m].confusion_rate = 0.05;
  }
  const auto sets = simulate(gt, profiles, 7);

  std::printf("%-10s  %s\n", "model", "mAP@0.5");
  std::vector<std::string> model_ids;
  for (const DetectionSet& set : sets) {
    model_ids.push_back(set.model_id);
    std::printf("%-10s  %.4f\n", set.model_id.c_str(),
                mean_ap(per_class_ap(set.detections, gt, 0.5)));
  }

  TuneSpec spec;
  spec.method = GridSearch{0.25};
  const EnsembleConfig base = EnsembleConfig::uniform(model_ids, 0.5, 0.0, 0.5);
  const TuneResult tuned = tune_weights(gt, sets, spec, base);

  const DetectionSet fused = to_detection_set(fuse(sets, tuned.config, &gt));
  std::printf("%-10s  %.4f  (weights:", "ensemble",
              mean_ap(per_class_ap(fused.detections, gt, 0.5)));
  for (const auto& [model_id, weight] : tuned.config.model_weights) {
    std::printf(" %s=%.2f", model_id.c_str(), weight);
  }
  std::printf(")\n");
  return 0;
}
