// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "ann/common.hpp"
#include "ann/gateway.hpp"

namespace ann {

struct ModelConfig {
  std::string name = "gpt-4o-mini";
  double temperature = 0.0;
  int max_output_tokens = 2048;
};

/// Knobs for the textual optimization analog: beta blends global against
/// block-local feedback, alpha controls momentum merging, eta gates edit
/// scope. All thresholds are inclusive.
struct OptimizerConfig {
  double beta = 0.5;              // [0,1]
  double alpha = 0.5;             // [0,1]
  double eta = 1.0;               // (0,1]
  int max_update_attempts = 3;
  int max_node_additions = 3;
  int perf_validation_sample = 4;
};

struct RunToggles {
  bool momentum = true;
  bool performance_validation = true;
  bool backward = true;
};

struct RunConfig {
  int epochs = 1;
  std::string train_dataset;
  std::string validation_dataset;
  RunToggles toggles;
  std::uint64_t seed = 0;
  int parallel_tasks = 1;
};

struct EngineConfig {
  std::string backend = "scripted";  // "scripted" or "live"
  llm::LiveConfig live;
  std::string api_key_env = "ANN_API_KEY";
  std::string script_path;
  llm::RetryPolicy retry;
  int parallelism = 4;
  std::map<std::string, llm::ModelPrice> prices;

  ModelConfig task_model;       // task agents; per-node temperature may override
  ModelConfig judge_model;      // verification and routing selection
  ModelConfig optimizer_model;  // gradients, momentum merging, block updates

  int selection_input_budget = 2000;  // chars of layer input shown to the selector
  double rubric_pass_threshold = 7.0;

  OptimizerConfig optimizer;
  RunConfig run;

  /// Parses and validates. Throws Error(ConfigInvalid) naming the offending
  /// field, e.g. "optimizer.beta: must be within [0,1]".
  static EngineConfig from_json(const std::string& json_text);
  static EngineConfig from_file(const std::string& path);

  std::string to_json() const;
};

}  // namespace ann
