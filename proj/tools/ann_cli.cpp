// SPDX-License-Identifier: Apache-2.0
//
// Command-line front door. Everything engine-related goes through the C API
// in ann/ann.h; this file only parses arguments, rewrites configuration
// JSON, and formats output.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ann/ann.h"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitTaskFailures = 1;
constexpr int kExitConfig = 2;

struct Overrides {
  std::string backend;
  std::string script;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::vector<std::string> toggles_off;
};

int fail_config(const std::string& what) {
  std::cerr << "error: " << what << "\n";
  return kExitConfig;
}

std::string take(char* text) {
  std::string out = text ? text : "";
  ann_string_free(text);
  return out;
}

// Loads the config file, applies command-line overrides, and resolves the
// script and dataset paths relative to the config file's directory.
bool load_config(const std::string& config_path, const Overrides& overrides,
                 ordered_json* out, std::string* error) {
  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    *error = "cannot read config " + config_path;
    return false;
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  ordered_json config = ordered_json::parse(buffer.str(), nullptr, false);
  if (config.is_discarded() || !config.is_object()) {
    *error = config_path + " is not a JSON object";
    return false;
  }

  // Paths written in the config file resolve against that file's directory;
  // paths given on the command line stay as typed.
  const fs::path base = fs::path(config_path).parent_path();
  auto resolve = [&](ordered_json& node) {
    if (!node.is_string()) return;
    std::string value = node.get<std::string>();
    if (value.empty() || fs::path(value).is_absolute()) return;
    node = (base / value).string();
  };
  if (config.contains("script")) resolve(config["script"]);
  if (config.contains("run") && config["run"].is_object()) {
    if (config["run"].contains("train_dataset")) {
      resolve(config["run"]["train_dataset"]);
    }
    if (config["run"].contains("validation_dataset")) {
      resolve(config["run"]["validation_dataset"]);
    }
  }

  if (!overrides.backend.empty()) config["backend"] = overrides.backend;
  if (!overrides.script.empty()) config["script"] = overrides.script;
  if (overrides.seed) config["run"]["seed"] = *overrides.seed;
  if (overrides.epochs) config["run"]["epochs"] = *overrides.epochs;
  for (const auto& toggle : overrides.toggles_off) {
    if (toggle == "momentum") {
      config["run"]["toggles"]["momentum"] = false;
    } else if (toggle == "perf") {
      config["run"]["toggles"]["performance_validation"] = false;
    } else if (toggle == "backward") {
      config["run"]["toggles"]["backward"] = false;
    } else {
      *error = "unknown toggle '" + toggle + "' (momentum, perf, backward)";
      return false;
    }
  }

  *out = std::move(config);
  return true;
}

struct EngineHandle {
  ann_engine* ptr = nullptr;
  ~EngineHandle() { ann_engine_free(ptr); }
};

struct NetworkHandle {
  ann_network* ptr = nullptr;
  ~NetworkHandle() { ann_network_free(ptr); }
};

bool make_engine(const ordered_json& config, EngineHandle* engine,
                 std::string* error) {
  auto status = ann_engine_create(config.dump().c_str(), &engine->ptr);
  if (status != ANN_OK) {
    *error = std::string(ann_status_name(status)) + ": " + ann_last_error();
    return false;
  }
  return true;
}

bool load_network(const std::string& path, NetworkHandle* network,
                  std::string* error) {
  auto status = ann_network_load(path.c_str(), &network->ptr);
  if (status != ANN_OK) {
    *error = std::string(ann_status_name(status)) + ": " + ann_last_error();
    return false;
  }
  return true;
}

void write_text(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

std::string metric_row(const ordered_json& epoch) {
  std::ostringstream row;
  row << "epoch " << epoch.value("epoch", 0) << ": train "
      << epoch.value("train_metric", 0.0) << "  validation "
      << epoch.value("validation_metric", 0.0) << "  pools "
      << epoch.value("pool_sizes", ordered_json::array()).dump() << "  accepted "
      << epoch.value("accepted_updates", 0) << "  rejected "
      << epoch.value("rejected_updates", 0) << "  fallbacks "
      << epoch.value("routing_fallbacks", 0);
  return row.str();
}

int cmd_run(const std::string& config_path, const Overrides& overrides,
            const std::string& network_path, const std::string& prompt,
            const std::string& data, const std::string& out_dir) {
  ordered_json config;
  std::string error;
  if (!load_config(config_path, overrides, &config, &error)) {
    return fail_config(error);
  }
  EngineHandle engine;
  NetworkHandle network;
  if (!make_engine(config, &engine, &error)) return fail_config(error);
  if (!load_network(network_path, &network, &error)) return fail_config(error);

  ordered_json task;
  task["task_id"] = "cli-task";
  task["task_prompt"] = prompt;
  if (!data.empty()) task["task_data"] = data;

  char* trajectory_json = nullptr;
  auto status = ann_run_forward(engine.ptr, network.ptr, task.dump().c_str(),
                                &trajectory_json);
  if (status != ANN_OK) {
    std::cerr << "forward pass failed (" << ann_status_name(status)
              << "): " << ann_last_error() << "\n";
    return kExitTaskFailures;
  }
  auto text = take(trajectory_json);
  ordered_json trajectory = ordered_json::parse(text);

  for (const auto& layer : trajectory.value("layers", ordered_json::array())) {
    std::cout << "layer " << layer.value("layer_index", 0) << ": block "
              << layer.value("selected_block_id", 0) << ", "
              << layer.value("nodes", ordered_json::array()).size()
              << " node call(s)\n";
  }
  for (const auto& event : trajectory.value("events", ordered_json::array())) {
    std::cout << "event [" << event.value("kind", std::string("?")) << "] layer "
              << event.value("layer_index", -1) << ": "
              << event.value("detail", std::string()) << "\n";
  }
  std::cout << "final output:\n"
            << trajectory.value("final_output", std::string()) << "\n";

  if (!out_dir.empty()) {
    write_text(fs::path(out_dir) / "trajectory.json", text);
    std::cout << "trajectory written to "
              << (fs::path(out_dir) / "trajectory.json").string() << "\n";
  }
  return kExitOk;
}

int cmd_train(const std::string& config_path, const Overrides& overrides,
              const std::string& network_path, const std::string& out_dir) {
  ordered_json config;
  std::string error;
  if (!load_config(config_path, overrides, &config, &error)) {
    return fail_config(error);
  }
  std::string train_dataset =
      config.contains("run") ? config["run"].value("train_dataset", "") : "";
  std::string validation_dataset =
      config.contains("run") ? config["run"].value("validation_dataset", "") : "";
  if (train_dataset.empty() || validation_dataset.empty()) {
    return fail_config("config run.train_dataset and run.validation_dataset are required");
  }

  EngineHandle engine;
  NetworkHandle network;
  if (!make_engine(config, &engine, &error)) return fail_config(error);
  if (!load_network(network_path, &network, &error)) return fail_config(error);

  ann_network* evolved = nullptr;
  char* summary_json = nullptr;
  auto status = ann_train(engine.ptr, network.ptr, train_dataset.c_str(),
                          validation_dataset.c_str(),
                          out_dir.empty() ? nullptr : out_dir.c_str(), &evolved,
                          &summary_json);
  if (status != ANN_OK) {
    std::cerr << "training failed (" << ann_status_name(status)
              << "): " << ann_last_error() << "\n";
    return fail_config(ann_last_error());
  }
  NetworkHandle evolved_handle{evolved};

  ordered_json summary = ordered_json::parse(take(summary_json));
  for (const auto& epoch : summary.value("history", ordered_json::array())) {
    std::cout << metric_row(epoch) << "\n";
  }
  const auto& stats = summary.value("stats", ordered_json::object());
  std::cout << "backward passes: " << stats.value("backward_invocations", 0)
            << ", momentum merges: " << stats.value("momentum_applications", 0)
            << ", skipped tasks: " << stats.value("skipped_tasks", 0) << "\n";
  for (const auto& warning : stats.value("warnings", ordered_json::array())) {
    std::cerr << "warning: " << warning.get<std::string>() << "\n";
  }

  if (!out_dir.empty()) {
    char* network_json = nullptr;
    if (ann_network_to_json(evolved, &network_json) == ANN_OK) {
      write_text(fs::path(out_dir) / "final.network.json", take(network_json));
      std::cout << "artifacts written to " << out_dir << "\n";
    }
  }

  int skipped = stats.value("skipped_tasks", 0);
  return skipped > 0 ? kExitTaskFailures : kExitOk;
}

int cmd_eval(const std::string& config_path, const Overrides& overrides,
             const std::string& network_path, const std::string& out_dir) {
  ordered_json config;
  std::string error;
  if (!load_config(config_path, overrides, &config, &error)) {
    return fail_config(error);
  }
  std::string dataset =
      config.contains("run") ? config["run"].value("validation_dataset", "") : "";
  if (dataset.empty()) {
    return fail_config("config run.validation_dataset is required");
  }

  EngineHandle engine;
  NetworkHandle network;
  if (!make_engine(config, &engine, &error)) return fail_config(error);
  if (!load_network(network_path, &network, &error)) return fail_config(error);

  double metric = 0.0;
  char* outcomes_json = nullptr;
  auto status = ann_evaluate(engine.ptr, network.ptr, dataset.c_str(), &metric,
                             &outcomes_json);
  if (status != ANN_OK) {
    std::cerr << "evaluation failed (" << ann_status_name(status)
              << "): " << ann_last_error() << "\n";
    return fail_config(ann_last_error());
  }
  auto outcomes_text = take(outcomes_json);
  ordered_json outcomes = ordered_json::parse(outcomes_text);

  int failed = 0;
  for (const auto& outcome : outcomes) {
    if (!outcome.value("passed", false)) {
      ++failed;
      std::cout << "failed: " << outcome.value("task_id", std::string("?")) << "\n";
    }
  }
  std::cout << "metric: " << metric << " (" << outcomes.size() - failed << "/"
            << outcomes.size() << " passed)\n";

  if (!out_dir.empty()) {
    write_text(fs::path(out_dir) / "outcomes.json", outcomes_text);
  }
  return failed > 0 ? kExitTaskFailures : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layered agentic-network engine: author, run, train, inspect."};
  app.require_subcommand(1);

  std::string config_path, network_path, out_dir, prompt, data, init_path, run_dir;
  Overrides overrides;

  auto add_common = [&](CLI::App* cmd, bool needs_network) {
    cmd->add_option("--config", config_path, "Configuration JSON file")->required();
    if (needs_network) {
      cmd->add_option("--network", network_path, "Network JSON file")->required();
    }
    cmd->add_option("--backend", overrides.backend, "Override backend")
        ->check(CLI::IsMember({"live", "scripted"}));
    cmd->add_option("--script", overrides.script, "Scripted-oracle rule file");
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& v) { overrides.seed = v; },
        "Override run.seed");
    cmd->add_option_function<int>(
        "--epochs", [&](const int& v) { overrides.epochs = v; },
        "Override run.epochs");
    cmd->add_option("--toggle-off", overrides.toggles_off,
                    "Disable a feature: momentum, perf, backward (repeatable)");
    cmd->add_option("--out", out_dir, "Directory for artifacts");
  };

  auto* init = app.add_subcommand("init", "Scaffold a starter project");
  init->add_option("path", init_path, "Target directory")->required();

  auto* run = app.add_subcommand("run", "One forward pass over a single task");
  add_common(run, true);
  run->add_option("task", prompt, "Task prompt text")->required();
  run->add_option("--data", data, "Optional task data payload");

  auto* train = app.add_subcommand("train", "Train over the configured datasets");
  add_common(train, true);

  auto* eval = app.add_subcommand("eval", "Evaluate on the validation dataset");
  add_common(eval, true);

  auto* inspect = app.add_subcommand("inspect", "Summarize a run directory");
  inspect->add_option("run_dir", run_dir, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (init->parsed()) {
    char* files_json = nullptr;
    auto status = ann_project_init(init_path.c_str(), &files_json);
    if (status != ANN_OK) {
      return fail_config(std::string(ann_status_name(status)) + ": " +
                         ann_last_error());
    }
    ordered_json files = ordered_json::parse(take(files_json));
    std::cout << "initialized " << init_path << "\n";
    for (const auto& file : files) {
      std::cout << "  " << file.get<std::string>() << "\n";
    }
    return kExitOk;
  }
  if (run->parsed()) {
    return cmd_run(config_path, overrides, network_path, prompt, data, out_dir);
  }
  if (train->parsed()) {
    return cmd_train(config_path, overrides, network_path, out_dir);
  }
  if (eval->parsed()) {
    return cmd_eval(config_path, overrides, network_path, out_dir);
  }
  if (inspect->parsed()) {
    char* text = nullptr;
    auto status = ann_inspect_run(run_dir.c_str(), &text);
    if (status != ANN_OK) {
      return fail_config(std::string(ann_status_name(status)) + ": " +
                         ann_last_error());
    }
    std::cout << take(text);
    return kExitOk;
  }
  return kExitConfig;
}
