// Copyright 2026 The Fuselab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end for the PCB defect ensemble toolkit. One subcommand
// per pipeline stage; every run is deterministic given its flags and seed and
// leaves a manifest next to each output artifact. Exit codes: 0 success,
// 1 validation/configuration error, 2 I/O error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fuselab/fuselab.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) out.push_back(token);
  return out;
}

std::string sanitize_stem(const std::string& id) {
  return fuselab::detail::sanitize_file_stem(id);
}

// ---------------------------------------------------------------------------
// preprocess
// ---------------------------------------------------------------------------

struct PreprocessArgs {
  std::string dataset;
  std::string out_dir;
  std::string config_path;
  int size = 600;
  bool binarize = false;
  bool size_given = false;
  bool binarize_given = false;
};

int run_preprocess(const PreprocessArgs& args) {
  fuselab::PreprocessConfig config;
  if (!args.config_path.empty()) {
    config = fuselab::preprocess_config_from_json(
        fuselab::detail::parse_json_file(args.config_path), args.config_path);
  }
  if (args.size_given || args.config_path.empty()) {
    config.target_width = config.target_height = args.size;
  }
  if (args.binarize_given || args.config_path.empty()) config.binarize = args.binarize;
  config.validate();

  fuselab::detail::ordered_json resolved;
  resolved["dataset"] = args.dataset;
  resolved["out"] = args.out_dir;
  resolved["size"] = config.target_width;
  resolved["binarize"] = config.binarize;
  fuselab::RunManifest manifest("preprocess", resolved);
  manifest.add_input(args.dataset);

  const fuselab::DatasetIndex input = fuselab::load_dataset(args.dataset);
  const fuselab::PreprocessResult result =
      fuselab::preprocess_dataset(input, config, args.out_dir);
  for (const auto& failure : result.failures) {
    std::cerr << "warning: image \"" << failure.image_id << "\" skipped: " << failure.message
              << "\n";
  }
  fuselab::save_dataset(result.dataset, (fs::path(args.out_dir) / "dataset.json").string());
  manifest.write(args.out_dir);
  return 0;
}

// ---------------------------------------------------------------------------
// augment
// ---------------------------------------------------------------------------

struct AugmentArgs {
  std::string dataset;
  std::string out_dir;
  std::string ops_csv;
  std::uint64_t seed = 0;
};

int run_augment(const AugmentArgs& args) {
  const std::vector<std::string> tokens = split_csv(args.ops_csv);
  if (tokens.empty()) throw fuselab::ConfigError("augment: --ops must name at least one op");
  std::vector<fuselab::AugmentOp> ops;
  ops.reserve(tokens.size());
  for (const std::string& token : tokens) ops.push_back(fuselab::parse_augment_op(token));

  fuselab::detail::ordered_json resolved;
  resolved["dataset"] = args.dataset;
  resolved["out"] = args.out_dir;
  resolved["ops"] = tokens;
  resolved["seed"] = args.seed;
  fuselab::RunManifest manifest("augment", resolved);
  manifest.add_input(args.dataset);

  const fuselab::DatasetIndex input = fuselab::load_dataset(args.dataset);
  fs::create_directories(fs::path(args.out_dir) / "images");

  // Output keeps the originals and adds one augmented copy per image, the op
  // drawn from the pool by a per-image seeded stream.
  std::vector<fuselab::ImageRecord> records;
  records.reserve(input.size() * 2);
  for (const fuselab::ImageRecord& rec : input.images()) records.push_back(rec);

  for (const fuselab::ImageRecord& rec : input.images()) {
    fuselab::CounterRng rng(args.seed, fuselab::fnv1a64("augment"), fuselab::fnv1a64(rec.id));
    const fuselab::AugmentOp& op = ops[rng.bounded(ops.size())];
    try {
      const fuselab::RasterImage img = fuselab::read_png(rec.path);
      if (img.width() != rec.width || img.height() != rec.height) {
        throw fuselab::ValidationError("image file dimensions do not match the record");
      }
      const fuselab::Augmented augmented = fuselab::apply_augment(img, rec.objects, op);

      fuselab::ImageRecord out_rec;
      out_rec.id = rec.id + "__" + fuselab::augment_op_tag(op);
      out_rec.width = augmented.image.width();
      out_rec.height = augmented.image.height();
      out_rec.objects = augmented.objects;
      const fs::path out_path =
          fs::path(args.out_dir) / "images" / (sanitize_stem(out_rec.id) + ".png");
      out_rec.path = out_path.string();
      fuselab::write_png(out_path.string(), augmented.image);
      records.push_back(std::move(out_rec));
    } catch (const fuselab::Error& e) {
      std::cerr << "warning: image \"" << rec.id << "\" not augmented: " << e.what() << "\n";
    }
  }

  fuselab::save_dataset(fuselab::DatasetIndex(std::move(records)),
                        (fs::path(args.out_dir) / "dataset.json").string());
  manifest.write(args.out_dir);
  return 0;
}

// ---------------------------------------------------------------------------
// split
// ---------------------------------------------------------------------------

struct SplitArgs {
  std::string dataset;
  std::string out_dir;
  fuselab::SplitSpec spec;
};

int run_split(const SplitArgs& args) {
  args.spec.validate();

  fuselab::detail::ordered_json resolved;
  resolved["dataset"] = args.dataset;
  resolved["out"] = args.out_dir;
  resolved["train"] = args.spec.train_fraction;
  resolved["val"] = args.spec.val_fraction;
  resolved["test"] = args.spec.test_fraction;
  resolved["seed"] = args.spec.seed;
  fuselab::RunManifest manifest("split", resolved);
  manifest.add_input(args.dataset);

  const fuselab::DatasetIndex input = fuselab::load_dataset(args.dataset);
  const fuselab::SplitResult result = fuselab::balanced_split(input, args.spec);

  fs::create_directories(args.out_dir);
  fuselab::save_dataset(result.train, (fs::path(args.out_dir) / "train.json").string());
  fuselab::save_dataset(result.val, (fs::path(args.out_dir) / "val.json").string());
  fuselab::save_dataset(result.test, (fs::path(args.out_dir) / "test.json").string());
  fuselab::detail::write_text_file(
      (fs::path(args.out_dir) / "allocation.json").string(),
      fuselab::split_report_to_json(result, args.spec).dump(2) + "\n");
  manifest.write(args.out_dir);
  return 0;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string dataset;
  std::string profiles;
  std::string out_dir;
  std::uint64_t seed = 0;
};

int run_simulate(const SimulateArgs& args) {
  fuselab::detail::ordered_json resolved;
  resolved["dataset"] = args.dataset;
  resolved["profiles"] = args.profiles;
  resolved["seed"] = args.seed;
  resolved["out"] = args.out_dir;
  fuselab::RunManifest manifest("simulate", resolved);
  manifest.add_input(args.dataset);
  manifest.add_input(args.profiles);

  const fuselab::DatasetIndex gt = fuselab::load_dataset(args.dataset);
  const auto profiles = fuselab::load_sim_profiles(args.profiles);
  const auto sets = fuselab::simulate(gt, profiles, args.seed);

  fs::create_directories(args.out_dir);
  for (const fuselab::DetectionSet& set : sets) {
    const fs::path out_path =
        fs::path(args.out_dir) / (sanitize_stem(set.model_id) + ".json");
    fuselab::save_detections(set, out_path.string());
  }
  manifest.write(args.out_dir);
  return 0;
}

// ---------------------------------------------------------------------------
// fuse
// ---------------------------------------------------------------------------

struct FuseArgs {
  std::vector<std::string> det_paths;
  std::string weights_csv;
  std::string config_path;
  std::string out_path;
  double match_iou = 0.5;
  double accept = 0.25;
  std::optional<double> nms_threshold;
  bool match_iou_given = false;
  bool accept_given = false;
};

fuselab::EnsembleConfig resolve_ensemble_config(const FuseArgs& args,
                                                const std::vector<fuselab::DetectionSet>& sets) {
  fuselab::EnsembleConfig config;
  if (!args.config_path.empty()) {
    config = fuselab::load_ensemble_config(args.config_path);
  } else {
    std::vector<std::string> model_ids;
    for (const auto& set : sets) model_ids.push_back(set.model_id);
    config = fuselab::EnsembleConfig::uniform(model_ids);
  }
  // Explicit flags beat the config file.
  if (args.match_iou_given || args.config_path.empty()) config.match_iou = args.match_iou;
  if (args.accept_given || args.config_path.empty()) config.accept_threshold = args.accept;
  if (args.nms_threshold) config.nms_threshold = args.nms_threshold;

  if (!args.weights_csv.empty()) {
    const auto tokens = split_csv(args.weights_csv);
    if (tokens.size() != sets.size()) {
      throw fuselab::ConfigError("--weights needs one value per --dets file (got " +
                                 std::to_string(tokens.size()) + " for " +
                                 std::to_string(sets.size()) + " files)");
    }
    std::vector<std::pair<std::string, double>> raw;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      try {
        raw.emplace_back(sets[i].model_id, std::stod(tokens[i]));
      } catch (const std::exception&) {
        throw fuselab::ConfigError("invalid weight \"" + tokens[i] + "\"");
      }
    }
    config = fuselab::EnsembleConfig::from_raw_weights(raw, config.match_iou,
                                                       config.accept_threshold,
                                                       config.nms_threshold);
  }
  config.validate();
  return config;
}

int run_fuse(const FuseArgs& args) {
  std::vector<fuselab::DetectionSet> sets;
  sets.reserve(args.det_paths.size());
  for (const std::string& path : args.det_paths) {
    sets.push_back(fuselab::load_detections(path));
  }
  const fuselab::EnsembleConfig config = resolve_ensemble_config(args, sets);

  fuselab::detail::ordered_json resolved;
  resolved["dets"] = args.det_paths;
  resolved["config"] = fuselab::ensemble_config_to_json(config);
  resolved["out"] = args.out_path;
  fuselab::RunManifest manifest("fuse", resolved);
  for (const std::string& path : args.det_paths) manifest.add_input(path);
  if (!args.config_path.empty()) manifest.add_input(args.config_path);

  const auto fused = fuselab::fuse(sets, config);
  fuselab::save_fused(fused, args.out_path);
  manifest.write(args.out_path);
  return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string gt_path;
  std::string det_path;
  std::string out_path;
  std::string csv_path;
  std::string overlays_dir;
  double iou = 0.5;
  bool coco_range = false;
  double score_threshold = 0.5;
};

int run_eval(const EvalArgs& args) {
  fuselab::EvalConfig config;
  config.score_threshold = args.score_threshold;
  config.iou_thresholds =
      args.coco_range ? fuselab::EvalConfig::coco_range() : std::vector<double>{args.iou};
  config.validate();

  fuselab::detail::ordered_json resolved;
  resolved["gt"] = args.gt_path;
  resolved["dets"] = args.det_path;
  resolved["iou_thresholds"] = config.iou_thresholds;
  resolved["score_threshold"] = config.score_threshold;
  resolved["out"] = args.out_path;
  fuselab::RunManifest manifest("eval", resolved);
  manifest.add_input(args.gt_path);
  manifest.add_input(args.det_path);

  const fuselab::DatasetIndex gt = fuselab::load_dataset(args.gt_path);
  const fuselab::DetectionSet dets = fuselab::load_detections(args.det_path);
  const fuselab::EvalReport report = fuselab::evaluate(gt, dets, config);

  fuselab::detail::write_text_file(args.out_path,
                                   fuselab::report_to_json(report).dump(2) + "\n");
  if (!args.csv_path.empty()) {
    fuselab::detail::write_text_file(args.csv_path, fuselab::report_to_csv(report));
  }

  if (!args.overlays_dir.empty()) {
    fs::create_directories(args.overlays_dir);
    for (const fuselab::ImageRecord& rec : gt.images()) {
      std::vector<const fuselab::Detection*> on_image;
      for (const fuselab::Detection& det : dets.detections) {
        if (det.image_id == rec.id) on_image.push_back(&det);
      }
      try {
        const fuselab::RasterImage img = fuselab::read_png(rec.path);
        const fuselab::RasterImage overlay = fuselab::render_overlay(img, on_image);
        fuselab::write_png(
            (fs::path(args.overlays_dir) / (sanitize_stem(rec.id) + ".png")).string(), overlay);
      } catch (const fuselab::Error& e) {
        std::cerr << "warning: no overlay for \"" << rec.id << "\": " << e.what() << "\n";
      }
    }
  }
  manifest.write(args.out_path);
  return 0;
}

// ---------------------------------------------------------------------------
// tune
// ---------------------------------------------------------------------------

struct TuneArgs {
  std::string gt_path;
  std::vector<std::string> det_paths;
  std::string method = "grid";
  std::string objective = "map50";
  double resolution = 0.05;
  int max_rounds = 20;
  double step = 0.05;
  double match_iou = 0.5;
  double accept = 0.25;
  std::optional<double> nms_threshold;
  std::string out_path;
  std::string trace_path;
};

int run_tune(const TuneArgs& args) {
  fuselab::TuneSpec spec;
  if (args.method == "grid") {
    spec.method = fuselab::GridSearch{args.resolution};
  } else if (args.method == "coord") {
    spec.method = fuselab::CoordinateAscent{args.max_rounds, args.step};
  } else if (args.method == "proportional") {
    spec.method = fuselab::Proportional{};
  } else {
    throw fuselab::ConfigError("unknown method \"" + args.method +
                               "\" (expected grid|coord|proportional)");
  }
  spec.objective = fuselab::parse_tune_objective(args.objective);
  spec.validate();

  fuselab::detail::ordered_json resolved;
  resolved["gt"] = args.gt_path;
  resolved["dets"] = args.det_paths;
  resolved["method"] = args.method;
  resolved["objective"] = args.objective;
  resolved["resolution"] = args.resolution;
  resolved["max_rounds"] = args.max_rounds;
  resolved["step"] = args.step;
  resolved["match_iou"] = args.match_iou;
  resolved["accept"] = args.accept;
  fuselab::RunManifest manifest("tune", resolved);
  manifest.add_input(args.gt_path);
  for (const std::string& path : args.det_paths) manifest.add_input(path);

  const fuselab::DatasetIndex gt = fuselab::load_dataset(args.gt_path);
  std::vector<fuselab::DetectionSet> sets;
  std::vector<std::string> model_ids;
  for (const std::string& path : args.det_paths) {
    sets.push_back(fuselab::load_detections(path));
    model_ids.push_back(sets.back().model_id);
  }

  const auto base = fuselab::EnsembleConfig::uniform(model_ids, args.match_iou, args.accept,
                                                     args.nms_threshold);
  const fuselab::TuneResult result = fuselab::tune_weights(gt, sets, spec, base);

  fuselab::save_ensemble_config(result.config, args.out_path);
  const std::string trace_path =
      args.trace_path.empty() ? args.out_path + ".trace.csv" : args.trace_path;
  fuselab::detail::write_text_file(trace_path,
                                   fuselab::tune_trace_to_csv(result, model_ids));
  manifest.write(args.out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensemble fusion and evaluation toolkit for PCB defect detection"};
  app.set_version_flag("--version", std::string("fuselab ") + FUSELAB_VERSION);
  app.require_subcommand(1);

  PreprocessArgs preprocess_args;
  auto* preprocess = app.add_subcommand(
      "preprocess", "Grayscale, optional Otsu binarization, resize to a uniform size");
  preprocess->add_option("--dataset", preprocess_args.dataset, "Input dataset JSON")
      ->required()
      ->check(CLI::ExistingFile);
  preprocess->add_option("--out", preprocess_args.out_dir, "Output directory")->required();
  preprocess->add_option("--size", preprocess_args.size, "Target size in pixels")
      ->default_val(600)
      ->check(CLI::PositiveNumber);
  preprocess->add_flag("--binarize", preprocess_args.binarize, "Apply Otsu binarization");
  preprocess->add_option("--config", preprocess_args.config_path,
                         "Pipeline config JSON (explicit flags win)")
      ->check(CLI::ExistingFile);

  AugmentArgs augment_args;
  auto* augment = app.add_subcommand(
      "augment", "Emit one augmented copy per image, op drawn from the pool per image");
  augment->add_option("--dataset", augment_args.dataset, "Input dataset JSON")
      ->required()
      ->check(CLI::ExistingFile);
  augment->add_option("--out", augment_args.out_dir, "Output directory")->required();
  augment
      ->add_option("--ops", augment_args.ops_csv,
                   "Comma-separated pool: rot90|rot180|rot270|flip_h|flip_v|brightness:F|rescale:F")
      ->required();
  augment->add_option("--seed", augment_args.seed, "Random seed")->default_val(0);

  SplitArgs split_args;
  auto* split = app.add_subcommand("split", "Balanced train/val/test split by dominant class");
  split->add_option("--dataset", split_args.dataset, "Input dataset JSON")
      ->required()
      ->check(CLI::ExistingFile);
  split->add_option("--out", split_args.out_dir, "Output directory")->required();
  split->add_option("--train", split_args.spec.train_fraction, "Train fraction")
      ->default_val(0.7);
  split->add_option("--val", split_args.spec.val_fraction, "Validation fraction")
      ->default_val(0.15);
  split->add_option("--test", split_args.spec.test_fraction, "Test fraction")
      ->default_val(0.15);
  split->add_option("--seed", split_args.spec.seed, "Shuffle seed")->default_val(0);

  SimulateArgs simulate_args;
  auto* simulate = app.add_subcommand(
      "simulate", "Generate synthetic per-model detections from ground truth");
  simulate->add_option("--dataset", simulate_args.dataset, "Ground-truth dataset JSON")
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--profiles", simulate_args.profiles, "Detector profiles JSON")
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--seed", simulate_args.seed, "Random seed")->default_val(0);
  simulate->add_option("--out", simulate_args.out_dir, "Output directory")->required();

  FuseArgs fuse_args;
  auto* fuse = app.add_subcommand("fuse", "Weighted consensus fusion of detection files");
  fuse->add_option("--dets", fuse_args.det_paths, "Detection files, one per model")
      ->required()
      ->check(CLI::ExistingFile);
  fuse->add_option("--weights", fuse_args.weights_csv,
                   "Comma-separated raw weights matching --dets order (renormalized)");
  fuse->add_option("--config", fuse_args.config_path, "Ensemble config JSON")
      ->check(CLI::ExistingFile);
  auto* match_iou_opt =
      fuse->add_option("--match-iou", fuse_args.match_iou, "Cross-model IoU match gate")
          ->default_val(0.5);
  auto* accept_opt =
      fuse->add_option("--accept", fuse_args.accept, "Consensus acceptance threshold")
          ->default_val(0.25);
  fuse->add_option("--nms", fuse_args.nms_threshold,
                   "Enable class-aware NMS dedup at this IoU threshold");
  fuse->add_option("--out", fuse_args.out_path, "Fused detections output file")->required();

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Evaluate detections against ground truth");
  eval->add_option("--gt", eval_args.gt_path, "Ground-truth dataset JSON")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--dets", eval_args.det_path, "Detections JSON")
      ->required()
      ->check(CLI::ExistingFile);
  auto* iou_opt =
      eval->add_option("--iou", eval_args.iou, "Single IoU threshold")->default_val(0.5);
  auto* range_flag = eval->add_flag("--coco-range", eval_args.coco_range,
                                    "Evaluate at the ten thresholds 0.50..0.95");
  iou_opt->excludes(range_flag);
  eval->add_option("--score-threshold", eval_args.score_threshold,
                   "Score cut for confusion metrics")
      ->default_val(0.5);
  eval->add_option("--overlays", eval_args.overlays_dir,
                   "Directory for annotated overlay PNGs");
  eval->add_option("--csv", eval_args.csv_path, "Per-class AP table CSV");
  eval->add_option("--out", eval_args.out_path, "Report JSON output")->required();

  TuneArgs tune_args;
  auto* tune = app.add_subcommand("tune", "Search ensemble weights on a validation split");
  tune->add_option("--gt", tune_args.gt_path, "Validation dataset JSON")
      ->required()
      ->check(CLI::ExistingFile);
  tune->add_option("--dets", tune_args.det_paths, "Detection files, one per model")
      ->required()
      ->check(CLI::ExistingFile);
  tune->add_option("--method", tune_args.method, "grid|coord|proportional")
      ->default_val("grid");
  tune->add_option("--objective", tune_args.objective, "map50|map5095|accuracy")
      ->default_val("map50");
  tune->add_option("--resolution", tune_args.resolution, "Grid resolution")->default_val(0.05);
  tune->add_option("--max-rounds", tune_args.max_rounds, "Coordinate ascent rounds")
      ->default_val(20);
  tune->add_option("--step", tune_args.step, "Coordinate ascent step")->default_val(0.05);
  tune->add_option("--match-iou", tune_args.match_iou, "Cross-model IoU match gate")
      ->default_val(0.5);
  tune->add_option("--accept", tune_args.accept, "Consensus acceptance threshold")
      ->default_val(0.25);
  tune->add_option("--nms", tune_args.nms_threshold,
                   "Enable class-aware NMS dedup at this IoU threshold");
  tune->add_option("--out", tune_args.out_path, "Winning ensemble config JSON")->required();
  tune->add_option("--trace", tune_args.trace_path,
                   "Search trace CSV (default: <out>.trace.csv)");

  try {
    app.parse(argc, argv);

    if (*preprocess) {
      preprocess_args.size_given = preprocess->count("--size") > 0;
      preprocess_args.binarize_given = preprocess->count("--binarize") > 0;
      return run_preprocess(preprocess_args);
    }
    if (*augment) return run_augment(augment_args);
    if (*split) return run_split(split_args);
    if (*simulate) return run_simulate(simulate_args);
    if (*fuse) {
      fuse_args.match_iou_given = match_iou_opt->count() > 0;
      fuse_args.accept_given = accept_opt->count() > 0;
      return run_fuse(fuse_args);
    }
    if (*eval) return run_eval(eval_args);
    if (*tune) return run_tune(tune_args);
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const fuselab::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fuselab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
