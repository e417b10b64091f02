// Copyright 2026 The Fuselab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>

#include "fuselab/error.hpp"

namespace fuselab {

/// The eight bare-PCB defect categories. The enumerator order is the
/// canonical order used for tie-breaking throughout the library.
enum class DefectClass : int {
  missing_hole = 0,
  mouse_bite,
  open_circuit,
  short_circuit,
  spur,
  spurious_copper,
  pinhole,
  scratch,
};

inline constexpr int kNumDefectClasses = 8;

inline constexpr std::array<std::string_view, kNumDefectClasses> kDefectClassNames = {
    "missing_hole", "mouse_bite",      "open_circuit", "short",
    "spur",         "spurious_copper", "pinhole",      "scratch",
};

inline constexpr std::array<DefectClass, kNumDefectClasses> kAllDefectClasses = {
    DefectClass::missing_hole,    DefectClass::mouse_bite, DefectClass::open_circuit,
    DefectClass::short_circuit,   DefectClass::spur,       DefectClass::spurious_copper,
    DefectClass::pinhole,         DefectClass::scratch,
};

inline std::string_view to_string(DefectClass cls) {
  return kDefectClassNames[static_cast<int>(cls)];
}

inline int class_index(DefectClass cls) { return static_cast<int>(cls); }

/// Lowercases, maps spaces and hyphens to underscores. Input datasets name
/// the same defect inconsistently ("Mouse Bite", "mouse-bite", ...).
inline std::string normalize_class_token(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    if (c == ' ' || c == '-') {
      out.push_back('_');
    } else {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

inline std::optional<DefectClass> try_parse_defect_class(std::string_view raw) {
  const std::string token = normalize_class_token(raw);
  for (int i = 0; i < kNumDefectClasses; ++i) {
    if (token == kDefectClassNames[i]) return static_cast<DefectClass>(i);
  }
  return std::nullopt;
}

inline DefectClass parse_defect_class(std::string_view raw) {
  if (auto cls = try_parse_defect_class(raw)) return *cls;
  throw ValidationError("unknown defect class \"" + std::string(raw) + "\"");
}

}  // namespace fuselab
