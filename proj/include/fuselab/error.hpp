// Copyright 2026 The Fuselab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace fuselab {

/// Base class of every error the library throws.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

/// Invalid configuration value: thresholds, weights, fractions, factors.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed file syntax (broken JSON, truncated line, wrong field count).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Syntactically valid document missing a required field or using a wrong type.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Well-formed data that breaks a domain invariant (range, bounds, duplicates).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure: unreadable input, unwritable output.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Evaluation impossible on the given data (e.g. no ground-truth class defined).
class EvalError : public Error {
 public:
  using Error::Error;
};

}  // namespace fuselab
