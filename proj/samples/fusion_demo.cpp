// Copyright 2026 The Fuselab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal end-to-end fusion example: two detectors disagree about the class
// of the same box; the weighted consensus vote settles it.

#include <iostream>

#include "fuselab/fusion.hpp"

using namespace fuselab;

int main() {
  const BoundingBox box{100, 100, 180, 160};

  DetectionSet model_a;
  model_a.model_id = "model_a";
  model_a.detections.push_back({"board_1", DefectClass::spur, box, 0.9, "model_a"});

  DetectionSet model_b;
  model_b.model_id = "model_b";
  model_b.detections.push_back({"board_1", DefectClass::short_circuit, box, 0.8, "model_b"});

  EnsembleConfig config = EnsembleConfig::uniform({"model_a", "model_b"});
  config.nms_threshold = 0.5;  // collapse the duplicate anchors

  for (const FusedDetection& det : fuse({model_a, model_b}, config)) {
    std::cout << det.image_id << ": " << to_string(det.cls) << " consensus=" << det.consensus
              << " anchor=" << det.anchor_model << "\n";
  }
  return 0;
}
