// Copyright 2026 The Fuselab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fuselab/data_model.hpp"
#include "fuselab/error.hpp"
#include "fuselab/eval.hpp"
#include "fuselab/fusion.hpp"

namespace fuselab {

enum class TuneObjective {
  map_50,
  map_50_95,
  accuracy,
};

inline const char* to_string(TuneObjective objective) {
  switch (objective) {
    case TuneObjective::map_50: return "map50";
    case TuneObjective::map_50_95: return "map5095";
    case TuneObjective::accuracy: return "accuracy";
  }
  return "map50";
}

inline TuneObjective parse_tune_objective(const std::string& token) {
  if (token == "map50") return TuneObjective::map_50;
  if (token == "map5095") return TuneObjective::map_50_95;
  if (token == "accuracy") return TuneObjective::accuracy;
  throw ConfigError("unknown objective \"" + token + "\" (expected map50|map5095|accuracy)");
}

struct GridSearch {
  double resolution = 0.05;
};
struct CoordinateAscent {
  int max_rounds = 20;
  double step = 0.05;
};
struct Proportional {};

using TuneMethod = std::variant<GridSearch, CoordinateAscent, Proportional>;

struct TuneSpec {
  TuneMethod method = GridSearch{};
  TuneObjective objective = TuneObjective::map_50;

  void validate() const {
    if (const auto* grid = std::get_if<GridSearch>(&method)) {
      if (!(grid->resolution > 0.0) || !(grid->resolution <= 0.5)) {
        throw ConfigError("grid resolution must be in (0, 0.5]");
      }
    }
    if (const auto* coord = std::get_if<CoordinateAscent>(&method)) {
      if (coord->max_rounds < 1) throw ConfigError("coordinate ascent needs max_rounds >= 1");
      if (!(coord->step > 0.0) || !(coord->step <= 0.5)) {
        throw ConfigError("coordinate ascent step must be in (0, 0.5]");
      }
    }
  }
};

struct TuneTracePoint {
  std::vector<double> weights;  // model order of the input sets
  double objective = 0.0;
};

struct TuneResult {
  EnsembleConfig config;
  double objective = 0.0;
  std::vector<TuneTracePoint> trace;
};

namespace detail {

inline double tune_objective_value(const EvalReport& report, TuneObjective objective) {
  switch (objective) {
    case TuneObjective::map_50:
      if (!report.map_50) throw EvalError("objective undefined: no class has ground truth");
      return *report.map_50;
    case TuneObjective::map_50_95:
      if (!report.map_50_95) throw EvalError("objective undefined: no class has ground truth");
      return *report.map_50_95;
    case TuneObjective::accuracy:
      return report.confusion.accuracy;
  }
  return 0.0;
}

inline EvalConfig eval_config_for(TuneObjective objective) {
  return objective == TuneObjective::map_50_95 ? EvalConfig::coco() : EvalConfig{};
}

/// All weight vectors with coordinates that are multiples of 1/steps and sum
/// to 1, in lexicographic order.
inline void enumerate_simplex(int models, int steps, std::vector<int>& prefix,
                              std::vector<std::vector<int>>& out) {
  if (models == 1) {
    prefix.push_back(steps);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int take = 0; take <= steps; ++take) {
    prefix.push_back(take);
    enumerate_simplex(models - 1, steps - take, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace detail

/// Chooses ensemble weights on a validation split. Grid search enumerates
/// the whole simplex at the given resolution and keeps the lexicographically
/// smallest maximizer; coordinate ascent perturbs one weight at a time and
/// renormalizes, keeping strict improvements; proportional skips the search
/// and weighs each model by its own single-model objective. All methods are
/// deterministic and return weights on the simplex.
inline TuneResult tune_weights(const DatasetIndex& val_gt,
                               const std::vector<DetectionSet>& sets, const TuneSpec& spec,
                               const EnsembleConfig& base_config) {
  spec.validate();
  if (val_gt.empty()) throw ValidationError("tune: validation set is empty");
  if (sets.empty()) throw ConfigError("tune: at least one detection set is required");

  const EvalConfig eval_config = detail::eval_config_for(spec.objective);

  const auto make_config = [&](const std::vector<double>& weights) {
    EnsembleConfig config = base_config;
    config.model_weights.clear();
    for (std::size_t m = 0; m < sets.size(); ++m) {
      config.model_weights.emplace_back(sets[m].model_id, weights[m]);
    }
    return config;
  };
  const auto score_weights = [&](const std::vector<double>& weights) {
    const EnsembleConfig config = make_config(weights);
    const DetectionSet fused = to_detection_set(fuse(sets, config, &val_gt));
    return detail::tune_objective_value(evaluate(val_gt, fused, eval_config), spec.objective);
  };

  TuneResult result;

  if (const auto* grid = std::get_if<GridSearch>(&spec.method)) {
    const int steps = std::max(1, static_cast<int>(std::lround(1.0 / grid->resolution)));
    std::vector<std::vector<int>> lattice;
    std::vector<int> prefix;
    detail::enumerate_simplex(static_cast<int>(sets.size()), steps, prefix, lattice);

    std::optional<double> best;
    std::vector<double> best_weights;
    for (const auto& point : lattice) {
      std::vector<double> weights(point.size());
      for (std::size_t m = 0; m < point.size(); ++m) {
        weights[m] = static_cast<double>(point[m]) / steps;
      }
      const double value = score_weights(weights);
      result.trace.push_back({weights, value});
      if (!best || value > *best) {  // lex order of enumeration breaks ties
        best = value;
        best_weights = weights;
      }
    }
    result.config = make_config(best_weights);
    result.objective = *best;
    return result;
  }

  if (const auto* coord = std::get_if<CoordinateAscent>(&spec.method)) {
    std::vector<double> weights(sets.size(), 1.0 / static_cast<double>(sets.size()));
    double current = score_weights(weights);
    result.trace.push_back({weights, current});

    for (int round = 0; round < coord->max_rounds; ++round) {
      bool improved = false;
      for (std::size_t m = 0; m < weights.size(); ++m) {
        for (double direction : {+1.0, -1.0}) {
          std::vector<double> candidate = weights;
          candidate[m] = std::max(0.0, candidate[m] + direction * coord->step);
          double sum = 0.0;
          for (double w : candidate) sum += w;
          if (!(sum > 0.0)) continue;
          for (double& w : candidate) w /= sum;
          const double value = score_weights(candidate);
          if (value > current) {
            current = value;
            weights = candidate;
            result.trace.push_back({weights, current});
            improved = true;
          }
        }
      }
      if (!improved) break;
    }
    result.config = make_config(weights);
    result.objective = current;
    return result;
  }

  // proportional: w_m = objective_m / sum, from each model's own detections
  std::vector<double> single(sets.size(), 0.0);
  double sum = 0.0;
  for (std::size_t m = 0; m < sets.size(); ++m) {
    single[m] =
        detail::tune_objective_value(evaluate(val_gt, sets[m], eval_config), spec.objective);
    sum += single[m];
  }
  std::vector<double> weights(sets.size());
  for (std::size_t m = 0; m < sets.size(); ++m) {
    // all-zero objectives degenerate to uniform weighting
    weights[m] = sum > 0.0 ? single[m] / sum : 1.0 / static_cast<double>(sets.size());
  }
  result.config = make_config(weights);
  result.objective = score_weights(weights);
  result.trace.push_back({weights, result.objective});
  return result;
}

/// CSV search trace: one candidate per row, weights then objective.
inline std::string tune_trace_to_csv(const TuneResult& result,
                                     const std::vector<std::string>& model_ids) {
  std::ostringstream out;
  for (const std::string& id : model_ids) out << "w_" << id << ",";
  out << "objective\n";
  for (const TuneTracePoint& point : result.trace) {
    for (double w : point.weights) out << w << ",";
    out << point.objective << "\n";
  }
  return out.str();
}

}  // namespace fuselab
