// Copyright 2026 The Fuselab Authors
// SPDX-License-Identifier: Apache-2.0

#include "fuselab/dataset_io.hpp"

#include <fstream>

#include <catch2/catch.hpp>

#include "fuselab/png_io.hpp"
#include "fuselab/rng.hpp"
#include "test_util.hpp"

using namespace fuselab;
using fuselab_test::TempDir;
using fuselab_test::make_record;

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

DatasetIndex two_object_dataset() {
  std::vector<ImageRecord> records;
  records.push_back(make_record("board_1", 600, 600,
                                {{DefectClass::missing_hole, {10, 10, 50, 50}},
                                 {DefectClass::spur, {100, 100, 160, 140}}}));
  return DatasetIndex(std::move(records));
}

}  // namespace

TEST_CASE("empty dataset loads with zero counts") {
  TempDir dir("io");
  write_file(dir.str("empty.json"), R"({"format":"fuselab-dataset/1","images":[]})");
  const DatasetIndex index = load_dataset(dir.str("empty.json"));
  CHECK(index.empty());
  for (std::size_t count : index.class_counts()) CHECK(count == 0);
}

TEST_CASE("class counts derive from the objects") {
  const DatasetIndex index = two_object_dataset();
  const auto counts = index.class_counts();
  CHECK(counts[class_index(DefectClass::missing_hole)] == 1);
  CHECK(counts[class_index(DefectClass::spur)] == 1);
  CHECK(counts[class_index(DefectClass::scratch)] == 0);
  CHECK(index.total_objects() == 2);
}

TEST_CASE("dataset round-trips field for field") {
  TempDir dir("io");
  const DatasetIndex index = two_object_dataset();
  save_dataset(index, dir.str("ds.json"));
  const DatasetIndex back = load_dataset(dir.str("ds.json"));
  CHECK(back == index);
}

TEST_CASE("dataset validation failures carry the image id") {
  TempDir dir("io");
  write_file(dir.str("oob.json"),
             R"({"format":"fuselab-dataset/1","images":[{"id":"bad_board","path":"x.png",)"
             R"("width":100,"height":100,"objects":[{"class":"spur","bbox":[0,0,101,50]}]}]})");
  CHECK_THROWS_WITH(load_dataset(dir.str("oob.json")), Catch::Contains("bad_board"));

  write_file(dir.str("dup.json"),
             R"({"format":"fuselab-dataset/1","images":[)"
             R"({"id":"a","path":"a.png","width":10,"height":10,"objects":[]},)"
             R"({"id":"a","path":"b.png","width":10,"height":10,"objects":[]}]})");
  CHECK_THROWS_AS(load_dataset(dir.str("dup.json")), ValidationError);
}

TEST_CASE("load errors distinguish parse, schema and validation") {
  TempDir dir("io");
  write_file(dir.str("broken.json"), "{not json");
  CHECK_THROWS_AS(load_dataset(dir.str("broken.json")), ParseError);

  write_file(dir.str("badformat.json"), R"({"format":"something/9","images":[]})");
  CHECK_THROWS_AS(load_dataset(dir.str("badformat.json")), SchemaError);

  write_file(dir.str("missing.json"), R"({"format":"fuselab-dataset/1"})");
  CHECK_THROWS_AS(load_dataset(dir.str("missing.json")), SchemaError);

  CHECK_THROWS_AS(load_dataset(dir.str("does-not-exist.json")), IoError);
}

TEST_CASE("empty detections file is a valid empty set") {
  TempDir dir("io");
  write_file(dir.str("dets.json"),
             R"({"format":"fuselab-detections/1","model":"m1","detections":[]})");
  const DetectionSet set = load_detections(dir.str("dets.json"));
  CHECK(set.model_id == "m1");
  CHECK(set.detections.empty());
  CHECK_FALSE(set.has_runtime());
}

TEST_CASE("detections with out-of-range scores are rejected") {
  TempDir dir("io");
  write_file(dir.str("dets.json"),
             R"({"format":"fuselab-detections/1","model":"m1","detections":[)"
             R"({"image_id":"a","class":"spur","bbox":[0,0,5,5],"score":1.5}]})");
  CHECK_THROWS_AS(load_detections(dir.str("dets.json")), ValidationError);
}

TEST_CASE("detection class strings normalize on input") {
  TempDir dir("io");
  write_file(dir.str("dets.json"),
             R"({"format":"fuselab-detections/1","model":"m1","detections":[)"
             R"({"image_id":"a","class":"Mouse Bite","bbox":[0,0,5,5],"score":0.5}]})");
  const DetectionSet set = load_detections(dir.str("dets.json"));
  REQUIRE(set.detections.size() == 1);
  CHECK(set.detections[0].cls == DefectClass::mouse_bite);
  CHECK(set.detections[0].model_id == "m1");
}

TEST_CASE("detections round-trip preserves scores exactly") {
  TempDir dir("io");
  DetectionSet set;
  set.model_id = "m1";
  set.detections.push_back({"a", DefectClass::spur, {0, 0, 5, 5}, 1.0 / 7.0, "m1"});
  set.detections.push_back({"a", DefectClass::pinhole, {1, 1, 6, 6}, 0.1234567890123456, "m1"});
  set.runtime_seconds["a"] = 0.125;
  save_detections(set, dir.str("dets.json"));
  const DetectionSet back = load_detections(dir.str("dets.json"));
  REQUIRE(back.detections.size() == 2);
  CHECK(back.detections[0].score == 1.0 / 7.0);
  CHECK(back.detections[1].score == 0.1234567890123456);
  CHECK(back == set);
}

TEST_CASE("round-trip identity on randomized instances") {
  TempDir dir("io");
  CounterRng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ImageRecord> records;
    const int images = 1 + static_cast<int>(rng.bounded(4));
    for (int i = 0; i < images; ++i) {
      std::vector<GroundTruthObject> objects;
      const int n = static_cast<int>(rng.bounded(4));
      for (int k = 0; k < n; ++k) {
        const double x = rng.uniform(0, 500);
        const double y = rng.uniform(0, 500);
        objects.push_back({static_cast<DefectClass>(rng.bounded(8)),
                           {x, y, x + rng.uniform(1, 90), y + rng.uniform(1, 90)}});
      }
      records.push_back(make_record("img_" + std::to_string(trial) + "_" + std::to_string(i),
                                    600, 600, std::move(objects)));
    }
    const DatasetIndex index{std::move(records)};
    save_dataset(index, dir.str("roundtrip.json"));
    CHECK(load_dataset(dir.str("roundtrip.json")) == index);
  }
}

TEST_CASE("writing to an unwritable path raises an I/O error") {
  TempDir dir("io");
  write_file(dir.str("blocker"), "plain file");
  CHECK_THROWS_AS(save_dataset(DatasetIndex{}, dir.str("blocker/out.json")), IoError);
}

TEST_CASE("yolo txt import converts normalized boxes to pixel corners") {
  TempDir dir("yolo");
  const auto images = dir.path() / "images";
  const auto labels = dir.path() / "labels";
  std::filesystem::create_directories(images);
  std::filesystem::create_directories(labels);
  write_png((images / "board.png").string(), RasterImage(600, 600, 1, 128));
  write_file((labels / "board.txt").string(), "0 0.5 0.5 1.0 1.0\n3 0.25 0.5 0.1 0.2\n");

  const std::map<int, DefectClass> class_map = {
      {0, DefectClass::missing_hole}, {3, DefectClass::short_circuit}};
  const DatasetIndex index = import_yolo_txt(images.string(), labels.string(), class_map);

  REQUIRE(index.size() == 1);
  const ImageRecord& rec = index.images()[0];
  CHECK(rec.id == "board");
  CHECK(rec.width == 600);
  CHECK(rec.height == 600);
  REQUIRE(rec.objects.size() == 2);
  CHECK(rec.objects[0].cls == DefectClass::missing_hole);
  CHECK(rec.objects[0].bbox == BoundingBox{0, 0, 600, 600});
  CHECK(rec.objects[1].cls == DefectClass::short_circuit);
  CHECK(rec.objects[1].bbox.x_min == Approx(120.0));
  CHECK(rec.objects[1].bbox.y_min == Approx(240.0));
  CHECK(rec.objects[1].bbox.x_max == Approx(180.0));
  CHECK(rec.objects[1].bbox.y_max == Approx(360.0));
}

TEST_CASE("yolo txt import rejects malformed lines with their location") {
  TempDir dir("yolo");
  const auto images = dir.path() / "images";
  const auto labels = dir.path() / "labels";
  std::filesystem::create_directories(images);
  std::filesystem::create_directories(labels);
  write_png((images / "board.png").string(), RasterImage(100, 100, 1, 0));

  const std::map<int, DefectClass> class_map = {{0, DefectClass::spur}};

  write_file((labels / "board.txt").string(), "0 0.5 0.5 0.2\n");
  CHECK_THROWS_WITH(import_yolo_txt(images.string(), labels.string(), class_map),
                    Catch::Contains("board.txt:1"));

  write_file((labels / "board.txt").string(), "7 0.5 0.5 0.2 0.2\n");
  CHECK_THROWS_AS(import_yolo_txt(images.string(), labels.string(), class_map),
                  ValidationError);

  write_file((labels / "board.txt").string(), "0 1.5 0.5 0.2 0.2\n");
  CHECK_THROWS_AS(import_yolo_txt(images.string(), labels.string(), class_map),
                  ValidationError);

  write_file((labels / "board.txt").string(), "0 0.5 0.5 0.2 0.2\n");
  std::filesystem::rename(labels / "board.txt", labels / "orphan.txt");
  CHECK_THROWS_AS(import_yolo_txt(images.string(), labels.string(), class_map),
                  ValidationError);
}
