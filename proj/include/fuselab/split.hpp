// Copyright 2026 The Fuselab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
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

struct SplitSpec {
  double train_fraction = 0.70;
  double val_fraction = 0.15;
  double test_fraction = 0.15;
  std::uint64_t seed = 0;

  void validate() const {
    for (double f : {train_fraction, val_fraction, test_fraction}) {
      if (!(f >= 0.0) || !std::isfinite(f)) {
        throw ConfigError("split fractions must be non-negative and finite");
      }
    }
    const double sum = train_fraction + val_fraction + test_fraction;
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ConfigError("train+val+test fractions must sum to 1 (got " +
                        std::to_string(sum) + ")");
    }
  }
};

struct GroupAllocation {
  std::string group;  // canonical class name, or "defect_free"
  std::size_t total = 0;
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

struct SplitResult {
  DatasetIndex train;
  DatasetIndex val;
  DatasetIndex test;
  std::vector<GroupAllocation> allocations;
};

namespace detail {

// Index 0..7 = dominant defect class, 8 = defect-free.
inline int dominant_group(const ImageRecord& rec) {
  if (rec.objects.empty()) return kNumDefectClasses;
  std::array<std::size_t, kNumDefectClasses> counts{};
  for (const GroundTruthObject& obj : rec.objects) ++counts[class_index(obj.cls)];
  int best = 0;
  for (int i = 1; i < kNumDefectClasses; ++i) {
    if (counts[i] > counts[best]) best = i;  // ties keep canonical order
  }
  return best;
}

/// Integer allocation with exact totals: floor the quotas, then hand the
/// leftover units to the largest remainders, ties resolved toward the
/// earlier split (train, then val, then test).
inline std::array<std::size_t, 3> largest_remainder(std::size_t n,
                                                    const std::array<double, 3>& fractions) {
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainders{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double quota = fractions[i] * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(quota));
    remainders[i] = quota - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::array<int, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (remainders[a] != remainders[b]) return remainders[a] > remainders[b];
    return a < b;
  });
  for (int i = 0; assigned < n; ++assigned, ++i) ++counts[order[i % 3]];
  return counts;
}

inline void fisher_yates(std::vector<std::size_t>& items, CounterRng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = rng.bounded(i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace detail

/// Partitions a dataset into train/val/test with per-class balance: images
/// group by their dominant defect class (defect-free images form their own
/// group), each group is shuffled by a seeded stream and allocated by
/// largest-remainder rounding, so every group lands within one image of its
/// exact quota. Deterministic given (dataset, spec).
inline SplitResult balanced_split(const DatasetIndex& dataset, const SplitSpec& spec) {
  spec.validate();
  constexpr int kNumGroups = kNumDefectClasses + 1;

  std::array<std::vector<std::size_t>, kNumGroups> groups;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    groups[detail::dominant_group(dataset.images()[i])].push_back(i);
  }

  // destination per image: 0 train, 1 val, 2 test
  std::vector<int> destination(dataset.size(), 0);
  SplitResult result;

  const std::array<double, 3> fractions = {spec.train_fraction, spec.val_fraction,
                                           spec.test_fraction};
  for (int g = 0; g < kNumGroups; ++g) {
    std::vector<std::size_t>& members = groups[g];
    if (members.empty()) continue;

    CounterRng rng(spec.seed, fnv1a64("split"), static_cast<std::uint64_t>(g));
    detail::fisher_yates(members, rng);
    const auto counts = detail::largest_remainder(members.size(), fractions);

    GroupAllocation alloc;
    alloc.group = g < kNumDefectClasses
                      ? std::string(kDefectClassNames[g])
                      : std::string("defect_free");
    alloc.total = members.size();
    alloc.train = counts[0];
    alloc.val = counts[1];
    alloc.test = counts[2];
    result.allocations.push_back(alloc);

    for (std::size_t k = 0; k < members.size(); ++k) {
      destination[members[k]] = k < counts[0] ? 0 : (k < counts[0] + counts[1] ? 1 : 2);
    }
  }

  // Splits keep the input image order.
  std::array<std::vector<ImageRecord>, 3> parts;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    parts[destination[i]].push_back(dataset.images()[i]);
  }
  result.train = DatasetIndex(std::move(parts[0]));
  result.val = DatasetIndex(std::move(parts[1]));
  result.test = DatasetIndex(std::move(parts[2]));
  return result;
}

inline detail::ordered_json split_report_to_json(const SplitResult& result,
                                                 const SplitSpec& spec) {
  detail::ordered_json doc;
  doc["format"] = "fuselab-split-report/1";
  doc["seed"] = spec.seed;
  doc["fractions"] = {{"train", spec.train_fraction},
                      {"val", spec.val_fraction},
                      {"test", spec.test_fraction}};
  auto& groups = doc["groups"] = detail::ordered_json::array();
  for (const GroupAllocation& alloc : result.allocations) {
    detail::ordered_json row;
    row["group"] = alloc.group;
    row["total"] = alloc.total;
    row["train"] = alloc.train;
    row["val"] = alloc.val;
    row["test"] = alloc.test;
    groups.push_back(std::move(row));
  }
  return doc;
}

}  // namespace fuselab
