// Copyright 2026 The Fuselab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "fuselab/error.hpp"

namespace fuselab::detail {

using ordered_json = nlohmann::ordered_json;

inline ordered_json parse_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open \"" + path + "\" for reading");
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open \"" + path + "\" for writing");
  out << text;
  if (!out) throw IoError("failed writing \"" + path + "\"");
}

inline const ordered_json& require_field(const ordered_json& j, const char* key,
                                         const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(where + ": missing field \"" + key + "\"");
  return *it;
}

inline std::string require_string(const ordered_json& j, const char* key,
                                  const std::string& where) {
  const ordered_json& v = require_field(j, key, where);
  if (!v.is_string()) throw SchemaError(where + ": field \"" + key + "\" must be a string");
  return v.get<std::string>();
}

inline double require_number(const ordered_json& j, const char* key,
                             const std::string& where) {
  const ordered_json& v = require_field(j, key, where);
  if (!v.is_number()) throw SchemaError(where + ": field \"" + key + "\" must be a number");
  return v.get<double>();
}

inline int require_int(const ordered_json& j, const char* key, const std::string& where) {
  const ordered_json& v = require_field(j, key, where);
  if (!v.is_number_integer()) {
    throw SchemaError(where + ": field \"" + key + "\" must be an integer");
  }
  return v.get<int>();
}

inline const ordered_json& require_array(const ordered_json& j, const char* key,
                                         const std::string& where) {
  const ordered_json& v = require_field(j, key, where);
  if (!v.is_array()) throw SchemaError(where + ": field \"" + key + "\" must be an array");
  return v;
}

inline void require_format(const ordered_json& j, const char* expected,
                           const std::string& where) {
  const std::string got = require_string(j, "format", where);
  if (got != expected) {
    throw SchemaError(where + ": expected format \"" + std::string(expected) +
                      "\", found \"" + got + "\"");
  }
}

}  // namespace fuselab::detail
