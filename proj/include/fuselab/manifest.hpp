// Copyright 2026 The Fuselab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fuselab/detail/json_util.hpp"
#include "fuselab/detail/sha256.hpp"
#include "fuselab/version.hpp"

namespace fuselab {

/// Reproducibility envelope written next to every CLI output artifact:
/// tool version, subcommand, the fully resolved configuration, input file
/// digests and wall-clock bounds.
class RunManifest {
 public:
  RunManifest(std::string subcommand, detail::ordered_json resolved_config)
      : subcommand_(std::move(subcommand)),
        config_(std::move(resolved_config)),
        start_(std::chrono::system_clock::now()) {}

  void add_input(const std::string& path) {
    inputs_.emplace_back(path, detail::sha256_file(path));
  }

  /// Writes `<artifact>.manifest.json` (or `manifest.json` inside directory
  /// artifacts). Manifests carry wall times and are never byte-reproducible;
  /// determinism checks must skip them.
  void write(const std::filesystem::path& artifact) const {
    const auto end = std::chrono::system_clock::now();
    detail::ordered_json doc;
    doc["format"] = "fuselab-manifest/1";
    doc["tool_version"] = FUSELAB_VERSION;
    doc["subcommand"] = subcommand_;
    doc["config"] = config_;
    auto& inputs = doc["inputs"] = detail::ordered_json::array();
    for (const auto& [path, digest] : inputs_) {
      inputs.push_back({{"path", path}, {"sha256", digest}});
    }
    doc["started_at"] = iso8601(start_);
    doc["finished_at"] = iso8601(end);
    doc["duration_seconds"] =
        std::chrono::duration_cast<std::chrono::duration<double>>(end - start_).count();

    std::filesystem::path manifest_path = artifact;
    if (std::filesystem::is_directory(artifact)) {
      manifest_path /= "manifest.json";
    } else {
      manifest_path += ".manifest.json";
    }
    detail::write_text_file(manifest_path.string(), doc.dump(2) + "\n");
  }

 private:
  static std::string iso8601(std::chrono::system_clock::time_point tp) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm utc{};
    gmtime_r(&t, &utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buf;
  }

  std::string subcommand_;
  detail::ordered_json config_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::chrono::system_clock::time_point start_;
};

}  // namespace fuselab
