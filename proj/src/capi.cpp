// SPDX-License-Identifier: Apache-2.0
#include "ann/ann.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include <json.hpp>

#include "ann/config.hpp"
#include "ann/eval.hpp"
#include "ann/forward.hpp"
#include "ann/graph.hpp"
#include "ann/project.hpp"
#include "ann/runtime.hpp"
#include "ann/training.hpp"

using ordered_json = nlohmann::ordered_json;

struct ann_engine {
  ann::Engine impl;
};

struct ann_network {
  ann::graph::Network impl;
};

namespace {

thread_local std::string g_last_error;

ann_status map_code(ann::ErrorCode code) {
  using ann::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return ANN_ERR_INVALID_ARGUMENT;
    case ErrorCode::ConfigInvalid: return ANN_ERR_CONFIG_INVALID;
    case ErrorCode::Io: return ANN_ERR_IO;
    case ErrorCode::ParseError: return ANN_ERR_PARSE;
    case ErrorCode::PathExists: return ANN_ERR_PATH_EXISTS;
    case ErrorCode::CycleDetected: return ANN_ERR_CYCLE_DETECTED;
    case ErrorCode::MissingBinding: return ANN_ERR_MISSING_BINDING;
    case ErrorCode::MissingTag: return ANN_ERR_MISSING_TAG;
    case ErrorCode::UnbalancedTag: return ANN_ERR_UNBALANCED_TAG;
    case ErrorCode::UnrecognizedVerdict: return ANN_ERR_UNRECOGNIZED_VERDICT;
    case ErrorCode::NoMatchingRule: return ANN_ERR_NO_MATCHING_RULE;
    case ErrorCode::Timeout: return ANN_ERR_TIMEOUT;
    case ErrorCode::RateLimited: return ANN_ERR_RATE_LIMITED;
    case ErrorCode::MalformedProviderReply: return ANN_ERR_MALFORMED_PROVIDER_REPLY;
    case ErrorCode::UnresolvableVariable: return ANN_ERR_UNRESOLVABLE_VARIABLE;
    case ErrorCode::NodeExecutionFailed: return ANN_ERR_NODE_EXECUTION_FAILED;
    case ErrorCode::JudgeUnparseable: return ANN_ERR_JUDGE_UNPARSEABLE;
    case ErrorCode::RubricUnparseable: return ANN_ERR_RUBRIC_UNPARSEABLE;
    case ErrorCode::MixedOutcomeKinds: return ANN_ERR_MIXED_OUTCOME_KINDS;
    case ErrorCode::GradientUnparseable: return ANN_ERR_GRADIENT_UNPARSEABLE;
    case ErrorCode::LayerwiseUnparseable: return ANN_ERR_LAYERWISE_UNPARSEABLE;
    case ErrorCode::EditBudgetExceeded: return ANN_ERR_EDIT_BUDGET_EXCEEDED;
    case ErrorCode::UnknownLayerReference: return ANN_ERR_UNKNOWN_LAYER_REFERENCE;
    case ErrorCode::Internal: return ANN_ERR_INTERNAL;
  }
  return ANN_ERR_INTERNAL;
}

char* dup_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (!out) return nullptr;
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

template <typename Fn>
ann_status guarded(Fn&& fn) {
  try {
    fn();
    return ANN_OK;
  } catch (const ann::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ANN_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return ANN_ERR_INTERNAL;
  }
}

ann_status require(bool ok, const char* what) {
  if (ok) return ANN_OK;
  g_last_error = what;
  return ANN_ERR_INVALID_ARGUMENT;
}

ann::exec::TaskInstance parse_task(const char* task_json) {
  ordered_json parsed = ordered_json::parse(task_json, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    throw ann::Error(ann::ErrorCode::ParseError, "task is not a JSON object");
  }
  if (!parsed.contains("task_prompt")) {
    throw ann::Error(ann::ErrorCode::ParseError, "task lacks task_prompt");
  }
  ann::exec::TaskInstance task;
  task.task_id = parsed.value("task_id", std::string("task"));
  task.task_prompt = parsed.at("task_prompt").get<std::string>();
  if (parsed.contains("task_data") && parsed.at("task_data").is_string()) {
    task.task_data = parsed.at("task_data").get<std::string>();
  }
  if (parsed.contains("ground_truth") && parsed.at("ground_truth").is_string()) {
    task.ground_truth = parsed.at("ground_truth").get<std::string>();
  }
  return task;
}

ordered_json usage_json(const ann::llm::UsageRecord& usage) {
  return {{"input_tokens", usage.input_tokens},
          {"output_tokens", usage.output_tokens},
          {"cost_estimate", usage.cumulative_cost_estimate}};
}

}  // namespace

extern "C" {

const char* ann_status_name(ann_status status) {
  switch (status) {
    case ANN_OK: return "Ok";
    case ANN_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case ANN_ERR_CONFIG_INVALID: return "ConfigInvalid";
    case ANN_ERR_IO: return "Io";
    case ANN_ERR_PARSE: return "ParseError";
    case ANN_ERR_PATH_EXISTS: return "PathExists";
    case ANN_ERR_CYCLE_DETECTED: return "CycleDetected";
    case ANN_ERR_MISSING_BINDING: return "MissingBinding";
    case ANN_ERR_MISSING_TAG: return "MissingTag";
    case ANN_ERR_UNBALANCED_TAG: return "UnbalancedTag";
    case ANN_ERR_UNRECOGNIZED_VERDICT: return "UnrecognizedVerdict";
    case ANN_ERR_NO_MATCHING_RULE: return "NoMatchingRule";
    case ANN_ERR_TIMEOUT: return "Timeout";
    case ANN_ERR_RATE_LIMITED: return "RateLimited";
    case ANN_ERR_MALFORMED_PROVIDER_REPLY: return "MalformedProviderReply";
    case ANN_ERR_UNRESOLVABLE_VARIABLE: return "UnresolvableVariable";
    case ANN_ERR_NODE_EXECUTION_FAILED: return "NodeExecutionFailed";
    case ANN_ERR_JUDGE_UNPARSEABLE: return "JudgeUnparseable";
    case ANN_ERR_RUBRIC_UNPARSEABLE: return "RubricUnparseable";
    case ANN_ERR_MIXED_OUTCOME_KINDS: return "MixedOutcomeKinds";
    case ANN_ERR_GRADIENT_UNPARSEABLE: return "GradientUnparseable";
    case ANN_ERR_LAYERWISE_UNPARSEABLE: return "LayerwiseUnparseable";
    case ANN_ERR_EDIT_BUDGET_EXCEEDED: return "EditBudgetExceeded";
    case ANN_ERR_UNKNOWN_LAYER_REFERENCE: return "UnknownLayerReference";
    case ANN_ERR_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* ann_last_error(void) { return g_last_error.c_str(); }

void ann_string_free(char* text) { std::free(text); }

ann_status ann_engine_create(const char* config_json, ann_engine** out) {
  if (auto bad = require(config_json && out, "config_json and out are required")) {
    return bad;
  }
  return guarded([&] {
    auto config = ann::EngineConfig::from_json(config_json);
    *out = new ann_engine{ann::Engine::create(config)};
  });
}

ann_status ann_engine_create_from_file(const char* config_path, ann_engine** out) {
  if (auto bad = require(config_path && out, "config_path and out are required")) {
    return bad;
  }
  return guarded([&] {
    auto config = ann::EngineConfig::from_file(config_path);
    *out = new ann_engine{ann::Engine::create(config)};
  });
}

void ann_engine_free(ann_engine* engine) { delete engine; }

ann_status ann_engine_usage(const ann_engine* engine, char** out_json) {
  if (auto bad = require(engine && out_json, "engine and out_json are required")) {
    return bad;
  }
  return guarded([&] {
    *out_json = dup_string(usage_json(engine->impl.gateway->usage()).dump() + "\n");
  });
}

ann_status ann_network_parse(const char* network_json, ann_network** out) {
  if (auto bad = require(network_json && out, "network_json and out are required")) {
    return bad;
  }
  return guarded([&] {
    *out = new ann_network{ann::graph::network_from_json(network_json)};
  });
}

ann_status ann_network_load(const char* path, ann_network** out) {
  if (auto bad = require(path && out, "path and out are required")) return bad;
  return guarded([&] {
    *out = new ann_network{ann::graph::network_from_file(path)};
  });
}

ann_status ann_network_to_json(const ann_network* network, char** out_json) {
  if (auto bad = require(network && out_json, "network and out_json are required")) {
    return bad;
  }
  return guarded([&] {
    *out_json = dup_string(ann::graph::network_to_json(network->impl));
  });
}

void ann_network_free(ann_network* network) { delete network; }

ann_status ann_network_validate(const ann_network* network, char** out_report_json) {
  if (auto bad = require(network && out_report_json,
                         "network and out_report_json are required")) {
    return bad;
  }
  return guarded([&] {
    ordered_json report = ordered_json::array();
    for (const auto& layer : network->impl.layers) {
      for (const auto& block : layer.pool) {
        auto result = ann::graph::validate_block(block, layer.pool);
        ordered_json entry;
        entry["layer_index"] = layer.layer_index;
        entry["block_id"] = block.block_id;
        entry["name"] = block.name;
        entry["passed"] = result.passed;
        entry["failures"] = ordered_json::array();
        for (const auto& failure : result.failures) {
          entry["failures"].push_back(
              {{"check", ann::graph::check_kind_name(failure.check)},
               {"detail", failure.detail}});
        }
        report.push_back(std::move(entry));
      }
    }
    *out_report_json = dup_string(report.dump(2) + "\n");
  });
}

ann_status ann_run_forward(const ann_engine* engine, const ann_network* network,
                           const char* task_json, char** out_trajectory_json) {
  if (auto bad = require(engine && network && task_json && out_trajectory_json,
                         "engine, network, task_json, out are required")) {
    return bad;
  }
  return guarded([&] {
    auto task = parse_task(task_json);
    auto trajectory = ann::exec::run_forward(engine->impl, network->impl, task);
    *out_trajectory_json = dup_string(ann::exec::trajectory_to_json(trajectory));
  });
}

ann_status ann_evaluate(const ann_engine* engine, const ann_network* network,
                        const char* dataset_path, double* out_metric,
                        char** out_outcomes_json) {
  if (auto bad = require(engine && network && dataset_path && out_metric,
                         "engine, network, dataset_path, out_metric are required")) {
    return bad;
  }
  return guarded([&] {
    auto tasks = ann::exec::load_tasks(dataset_path);
    std::vector<ann::eval::EvalOutcome> outcomes;
    *out_metric =
        ann::train::evaluate(engine->impl, network->impl, tasks,
                             engine->impl.config.run.parallel_tasks, &outcomes);
    if (out_outcomes_json) {
      ordered_json list = ordered_json::array();
      for (size_t i = 0; i < outcomes.size(); ++i) {
        list.push_back({{"task_id", tasks[i].task_id},
                        {"passed", outcomes[i].passed},
                        {"detail", outcomes[i].diagnostic.empty()
                                       ? outcomes[i].raw_judge_text
                                       : outcomes[i].diagnostic}});
      }
      *out_outcomes_json = dup_string(list.dump(2) + "\n");
    }
  });
}

ann_status ann_train(const ann_engine* engine, const ann_network* network,
                     const char* train_dataset_path,
                     const char* validation_dataset_path, const char* run_dir,
                     ann_network** out_network, char** out_summary_json) {
  if (auto bad = require(engine && network && train_dataset_path &&
                             validation_dataset_path && out_network,
                         "engine, network, dataset paths, out_network are required")) {
    return bad;
  }
  return guarded([&] {
    auto train_tasks = ann::exec::load_tasks(train_dataset_path);
    auto validation_tasks = ann::exec::load_tasks(validation_dataset_path);
    auto result =
        ann::train::train(engine->impl, network->impl, train_tasks,
                          validation_tasks, run_dir ? run_dir : "");
    *out_network = new ann_network{std::move(result.network)};
    if (out_summary_json) {
      ordered_json summary;
      summary["history"] = ordered_json::array();
      for (const auto& metrics : result.history) {
        summary["history"].push_back(
            ordered_json::parse(ann::train::epoch_metrics_to_json(metrics)));
      }
      summary["stats"] = {
          {"backward_invocations", result.stats.backward_invocations},
          {"momentum_applications", result.stats.momentum_applications},
          {"skipped_tasks", result.stats.skipped_tasks},
          {"warnings", result.stats.warnings}};
      *out_summary_json = dup_string(summary.dump(2) + "\n");
    }
  });
}

ann_status ann_project_init(const char* path, char** out_files_json) {
  if (auto bad = require(path != nullptr, "path is required")) return bad;
  return guarded([&] {
    auto result = ann::project::init(path);
    if (out_files_json) {
      ordered_json files = result.files;
      *out_files_json = dup_string(files.dump(2) + "\n");
    }
  });
}

ann_status ann_inspect_run(const char* run_dir, char** out_text) {
  if (auto bad = require(run_dir && out_text, "run_dir and out_text are required")) {
    return bad;
  }
  return guarded([&] {
    *out_text = dup_string(ann::project::inspect_run(run_dir));
  });
}

}  // extern "C"
