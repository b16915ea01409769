// SPDX-License-Identifier: Apache-2.0
#include "ann/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ann {

using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::ConfigInvalid, field + ": " + why);
}

double number_in(const ordered_json& node, const std::string& field, double fallback,
                 double lo, double hi) {
  if (!node.contains(field)) return fallback;
  if (!node.at(field).is_number()) invalid(field, "must be a number");
  double value = node.at(field).get<double>();
  if (value < lo || value > hi) {
    invalid(field, "must be within [" + std::to_string(lo) + "," +
                       std::to_string(hi) + "]");
  }
  return value;
}

int integer_at_least(const ordered_json& node, const std::string& field, int fallback,
                     int lo) {
  if (!node.contains(field)) return fallback;
  if (!node.at(field).is_number_integer()) invalid(field, "must be an integer");
  int value = node.at(field).get<int>();
  if (value < lo) invalid(field, "must be at least " + std::to_string(lo));
  return value;
}

std::string string_or(const ordered_json& node, const std::string& field,
                      std::string fallback) {
  if (!node.contains(field)) return fallback;
  if (!node.at(field).is_string()) invalid(field, "must be a string");
  return node.at(field).get<std::string>();
}

bool bool_or(const ordered_json& node, const std::string& field, bool fallback) {
  if (!node.contains(field)) return fallback;
  if (!node.at(field).is_boolean()) invalid(field, "must be a boolean");
  return node.at(field).get<bool>();
}

ModelConfig model_config(const ordered_json& node, const std::string& prefix,
                         ModelConfig fallback) {
  ModelConfig model = fallback;
  model.name = string_or(node, "name", model.name);
  if (model.name.empty()) invalid(prefix + ".name", "must be non-empty");
  model.temperature = number_in(node, "temperature", model.temperature, 0.0, 2.0);
  model.max_output_tokens =
      integer_at_least(node, "max_output_tokens", model.max_output_tokens, 1);
  return model;
}

}  // namespace

EngineConfig EngineConfig::from_json(const std::string& json_text) {
  ordered_json in = ordered_json::parse(json_text, nullptr, false);
  if (in.is_discarded()) {
    throw Error(ErrorCode::ConfigInvalid, "config: malformed JSON");
  }
  if (!in.is_object()) {
    throw Error(ErrorCode::ConfigInvalid, "config: must be a JSON object");
  }

  EngineConfig config;
  config.backend = string_or(in, "backend", config.backend);
  if (config.backend != "scripted" && config.backend != "live") {
    invalid("backend", "must be \"scripted\" or \"live\"");
  }

  if (in.contains("live")) {
    const auto& live = in.at("live");
    if (!live.is_object()) invalid("live", "must be an object");
    config.live.base_url = string_or(live, "base_url", config.live.base_url);
    config.live.completions_path =
        string_or(live, "completions_path", config.live.completions_path);
    config.live.api_key = string_or(live, "api_key", config.live.api_key);
    config.live.connect_timeout_seconds = integer_at_least(
        live, "connect_timeout_seconds", config.live.connect_timeout_seconds, 1);
    config.live.read_timeout_seconds = integer_at_least(
        live, "read_timeout_seconds", config.live.read_timeout_seconds, 1);
  }
  if (config.backend == "live" && config.live.base_url.empty()) {
    invalid("live.base_url", "required for the live backend");
  }

  config.api_key_env = string_or(in, "api_key_env", config.api_key_env);
  config.script_path = string_or(in, "script", config.script_path);

  if (in.contains("retry")) {
    const auto& retry = in.at("retry");
    if (!retry.is_object()) invalid("retry", "must be an object");
    config.retry.max_attempts =
        integer_at_least(retry, "max_attempts", config.retry.max_attempts, 1);
    config.retry.initial_backoff_ms =
        integer_at_least(retry, "initial_backoff_ms", config.retry.initial_backoff_ms, 0);
    config.retry.backoff_multiplier =
        number_in(retry, "backoff_multiplier", config.retry.backoff_multiplier, 1.0, 10.0);
  }
  config.parallelism = integer_at_least(in, "parallelism", config.parallelism, 1);

  if (in.contains("prices")) {
    const auto& prices = in.at("prices");
    if (!prices.is_object()) invalid("prices", "must be an object");
    for (auto it = prices.begin(); it != prices.end(); ++it) {
      llm::ModelPrice price;
      price.input_per_million =
          number_in(it.value(), "input_per_million", 0.0, 0.0, 1e6);
      price.output_per_million =
          number_in(it.value(), "output_per_million", 0.0, 0.0, 1e6);
      config.prices[it.key()] = price;
    }
  }

  if (in.contains("models")) {
    const auto& models = in.at("models");
    if (!models.is_object()) invalid("models", "must be an object");
    if (models.contains("task")) {
      config.task_model = model_config(models.at("task"), "models.task", config.task_model);
    }
    if (models.contains("judge")) {
      config.judge_model =
          model_config(models.at("judge"), "models.judge", config.judge_model);
    }
    if (models.contains("optimizer")) {
      config.optimizer_model =
          model_config(models.at("optimizer"), "models.optimizer", config.optimizer_model);
    }
  }

  config.selection_input_budget =
      integer_at_least(in, "selection_input_budget", config.selection_input_budget, 1);
  config.rubric_pass_threshold =
      number_in(in, "rubric_pass_threshold", config.rubric_pass_threshold, 0.0, 10.0);

  if (in.contains("optimizer")) {
    const auto& optimizer = in.at("optimizer");
    if (!optimizer.is_object()) invalid("optimizer", "must be an object");
    config.optimizer.beta = number_in(optimizer, "beta", config.optimizer.beta, 0.0, 1.0);
    config.optimizer.alpha =
        number_in(optimizer, "alpha", config.optimizer.alpha, 0.0, 1.0);
    config.optimizer.eta = number_in(optimizer, "eta", config.optimizer.eta, 0.0, 1.0);
    if (config.optimizer.eta <= 0.0) invalid("optimizer.eta", "must be within (0,1]");
    config.optimizer.max_update_attempts = integer_at_least(
        optimizer, "max_update_attempts", config.optimizer.max_update_attempts, 1);
    config.optimizer.max_node_additions = integer_at_least(
        optimizer, "max_node_additions", config.optimizer.max_node_additions, 0);
    config.optimizer.perf_validation_sample = integer_at_least(
        optimizer, "perf_validation_sample", config.optimizer.perf_validation_sample, 1);
  }

  if (in.contains("run")) {
    const auto& run = in.at("run");
    if (!run.is_object()) invalid("run", "must be an object");
    config.run.epochs = integer_at_least(run, "epochs", config.run.epochs, 1);
    config.run.train_dataset = string_or(run, "train_dataset", config.run.train_dataset);
    config.run.validation_dataset =
        string_or(run, "validation_dataset", config.run.validation_dataset);
    if (run.contains("seed")) {
      if (!run.at("seed").is_number_unsigned() && !run.at("seed").is_number_integer()) {
        invalid("run.seed", "must be an integer");
      }
      config.run.seed = run.at("seed").get<std::uint64_t>();
    }
    config.run.parallel_tasks =
        integer_at_least(run, "parallel_tasks", config.run.parallel_tasks, 1);
    if (run.contains("toggles")) {
      const auto& toggles = run.at("toggles");
      if (!toggles.is_object()) invalid("run.toggles", "must be an object");
      config.run.toggles.momentum =
          bool_or(toggles, "momentum", config.run.toggles.momentum);
      config.run.toggles.performance_validation = bool_or(
          toggles, "performance_validation", config.run.toggles.performance_validation);
      config.run.toggles.backward =
          bool_or(toggles, "backward", config.run.toggles.backward);
    }
  }

  return config;
}

EngineConfig EngineConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

std::string EngineConfig::to_json() const {
  ordered_json out;
  out["backend"] = backend;
  if (!live.base_url.empty()) {
    out["live"] = {{"base_url", live.base_url},
                   {"completions_path", live.completions_path},
                   {"connect_timeout_seconds", live.connect_timeout_seconds},
                   {"read_timeout_seconds", live.read_timeout_seconds}};
    // api_key deliberately not serialized
  }
  out["api_key_env"] = api_key_env;
  if (!script_path.empty()) out["script"] = script_path;
  out["retry"] = {{"max_attempts", retry.max_attempts},
                  {"initial_backoff_ms", retry.initial_backoff_ms},
                  {"backoff_multiplier", retry.backoff_multiplier}};
  out["parallelism"] = parallelism;
  if (!prices.empty()) {
    out["prices"] = ordered_json::object();
    for (const auto& [model, price] : prices) {
      out["prices"][model] = {{"input_per_million", price.input_per_million},
                              {"output_per_million", price.output_per_million}};
    }
  }
  auto model_json = [](const ModelConfig& model) {
    return ordered_json{{"name", model.name},
                        {"temperature", model.temperature},
                        {"max_output_tokens", model.max_output_tokens}};
  };
  out["models"] = {{"task", model_json(task_model)},
                   {"judge", model_json(judge_model)},
                   {"optimizer", model_json(optimizer_model)}};
  out["selection_input_budget"] = selection_input_budget;
  out["rubric_pass_threshold"] = rubric_pass_threshold;
  out["optimizer"] = {{"beta", optimizer.beta},
                      {"alpha", optimizer.alpha},
                      {"eta", optimizer.eta},
                      {"max_update_attempts", optimizer.max_update_attempts},
                      {"max_node_additions", optimizer.max_node_additions},
                      {"perf_validation_sample", optimizer.perf_validation_sample}};
  out["run"] = {{"epochs", run.epochs},
                {"train_dataset", run.train_dataset},
                {"validation_dataset", run.validation_dataset},
                {"seed", run.seed},
                {"parallel_tasks", run.parallel_tasks},
                {"toggles",
                 {{"momentum", run.toggles.momentum},
                  {"performance_validation", run.toggles.performance_validation},
                  {"backward", run.toggles.backward}}}};
  return out.dump(2) + "\n";
}

}  // namespace ann
