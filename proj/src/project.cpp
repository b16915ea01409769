// SPDX-License-Identifier: Apache-2.0
#include "ann/project.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "ann/config.hpp"
#include "ann/graph.hpp"
#include "ann/training.hpp"

namespace ann::project {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

void write_file(const fs::path& path, const std::string& content,
                InitResult* result, const fs::path& root) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << content;
  if (result) result->files.push_back(fs::relative(path, root).generic_string());
}

graph::Network starter_network() {
  graph::Network network;

  graph::BlockVariant planner;
  planner.block_id = 1;
  planner.name = "Planner1";
  planner.structure_description = "single planning agent";
  graph::NodeSpec plan;
  plan.node_name = "plan";
  plan.agent_role = "a planning assistant";
  plan.prompt_template = "Plan the steps needed to answer the task.\nTask: {task}";
  plan.input_variables = {graph::VariableRef::state("task", "task_prompt")};
  plan.output_format = "a short numbered list of steps";
  planner.nodes = {plan};
  planner.entry_node = planner.end_node = "plan";

  graph::BlockVariant executor;
  executor.block_id = 1;
  executor.name = "Executor1";
  executor.structure_description = "single answering agent following the plan";
  graph::NodeSpec answer;
  answer.node_name = "answer";
  answer.agent_role = "a careful problem solver";
  answer.prompt_template =
      "Follow the plan and answer the task.\nPlan: {plan}\nTask: {task}";
  answer.input_variables = {
      graph::VariableRef::cross_block("plan", 0, graph::kEndOutputKey),
      graph::VariableRef::state("task", "task_prompt")};
  answer.output_format = "the final answer only";
  executor.nodes = {answer};
  executor.entry_node = executor.end_node = "answer";

  graph::LayerSlot layer0;
  layer0.layer_index = 0;
  layer0.pool = {planner};
  graph::LayerSlot layer1;
  layer1.layer_index = 1;
  layer1.pool = {executor};
  network.layers = {layer0, layer1};
  network.task_profile = "arithmetic word problems answered with a bare number";
  return network;
}

const char* kExampleRules = R"({
  "rules": [
    {"match": ["Plan the steps"],
     "reply": "1. Restate the task. 2. Compute the result. 3. Reply with just the number."},
    {"match": ["Follow the plan", "6 times 7"], "reply": "42"},
    {"match": ["Follow the plan", "5 plus 3"], "reply": "8"},
    {"match": ["Follow the plan", "10 minus 4"], "reply": "6"},
    {"match": ["verify the answer"], "reply": "The answer is correct."},
    {"match": ["selected_agg_func"],
     "reply": "<selected_agg_func> 1 </selected_agg_func>"}
  ],
  "default_reply": "OK"
})";

const char* kTrainDataset = R"([
  {"task_id": "demo-1", "task_prompt": "What is 6 times 7?", "ground_truth": "42"},
  {"task_id": "demo-2", "task_prompt": "What is 5 plus 3?", "ground_truth": "8"}
])";

const char* kValidationDataset = R"([
  {"task_id": "demo-3", "task_prompt": "What is 10 minus 4?", "ground_truth": "6"}
])";

const char* kScaffoldReadme = R"(# Starter project

A two-layer network (planner feeding an executor) wired to a scripted oracle,
so every command below is deterministic and runs offline.

Demo forward pass:

    ann run --config config.json --network networks/starter.network.json "What is 6 times 7?"

With the bundled script the planner always emits the three-step plan and the
executor answers `42`, so the printed final output is exactly:

    42

Demo training run (every demo task passes, so pools stay at size 1):

    ann train --config config.json --network networks/starter.network.json --out runs/demo
    ann inspect runs/demo

Point `backend` at `live` in config.json (and set the API key environment
variable it names) to run the same network against a real provider.
)";

}  // namespace

InitResult init(const std::string& path) {
  fs::path root(path);
  if (fs::exists(root) && !fs::is_directory(root)) {
    throw Error(ErrorCode::PathExists, path + " exists and is not a directory");
  }
  if (fs::exists(root / "config.json")) {
    throw Error(ErrorCode::PathExists, path + " already holds a project");
  }
  fs::create_directories(root);

  InitResult result;

  EngineConfig config;
  config.backend = "scripted";
  config.script_path = "scripts/example.rules.json";
  config.run.epochs = 2;
  config.run.train_dataset = "datasets/train.json";
  config.run.validation_dataset = "datasets/validation.json";
  write_file(root / "config.json", config.to_json(), &result, root);

  auto network = starter_network();
  for (const auto& layer : network.layers) {
    for (const auto& block : layer.pool) {
      auto report = graph::validate_block(block, layer.pool);
      if (!report.passed) {
        throw Error(ErrorCode::Internal, "starter network failed validation");
      }
    }
  }
  write_file(root / "networks" / "starter.network.json",
             graph::network_to_json(network), &result, root);
  write_file(root / "scripts" / "example.rules.json", kExampleRules, &result, root);
  write_file(root / "datasets" / "train.json", kTrainDataset, &result, root);
  write_file(root / "datasets" / "validation.json", kValidationDataset, &result, root);
  write_file(root / "README.md", kScaffoldReadme, &result, root);
  fs::create_directories(root / "runs");
  return result;
}

std::string inspect_run(const std::string& run_dir) {
  fs::path root(run_dir);
  std::ifstream history(root / "history.jsonl");
  if (!history.good()) {
    throw Error(ErrorCode::Io, run_dir + " has no history.jsonl");
  }

  std::ostringstream out;
  out << "Run summary: " << run_dir << "\n\n";
  out << "epoch | train  | valid  | pool sizes | accepted | rejected | fallbacks\n";

  std::string line;
  int epochs = 0;
  while (std::getline(history, line)) {
    if (trim(line).empty()) continue;
    auto metrics = train::epoch_metrics_from_json(line);
    ++epochs;
    std::ostringstream pools;
    pools << "[";
    for (size_t i = 0; i < metrics.pool_sizes.size(); ++i) {
      if (i) pools << ",";
      pools << metrics.pool_sizes[i];
    }
    pools << "]";
    out << std::setw(5) << metrics.epoch << " | " << std::fixed
        << std::setprecision(4) << metrics.train_metric << " | "
        << metrics.validation_metric << " | " << std::setw(10) << pools.str()
        << " | " << std::setw(8) << metrics.accepted_updates << " | "
        << std::setw(8) << metrics.rejected_updates << " | " << std::setw(9)
        << metrics.routing_fallbacks << "\n";
  }
  out << "\n";

  // Step files: step-{n}.global.json and step-{n}.block.json.
  struct StepFile {
    int step;
    bool is_block;
    fs::path path;
  };
  std::vector<StepFile> steps;
  for (const auto& entry : fs::directory_iterator(root)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("step-", 0) != 0) continue;
    size_t dot = name.find('.');
    if (dot == std::string::npos) continue;
    int step = 0;
    try {
      step = std::stoi(name.substr(5, dot - 5));
    } catch (...) {
      continue;
    }
    if (name.find(".block.json") != std::string::npos) {
      steps.push_back({step, true, entry.path()});
    } else if (name.find(".global.json") != std::string::npos) {
      steps.push_back({step, false, entry.path()});
    }
  }
  std::sort(steps.begin(), steps.end(),
            [](const StepFile& a, const StepFile& b) { return a.step < b.step; });

  int global_count = 0;
  std::ostringstream lineage;
  for (const auto& step : steps) {
    if (!step.is_block) {
      ++global_count;
      continue;
    }
    std::ifstream in(step.path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    ordered_json envelope = ordered_json::parse(buffer.str(), nullptr, false);
    if (envelope.is_discarded()) continue;
    const auto& block = envelope.value("block", ordered_json::object());
    lineage << "  step " << step.step << " (epoch " << envelope.value("epoch", -1)
            << ", task " << envelope.value("task_id", std::string("?")) << "): layer "
            << envelope.value("layer_index", -1) << ", "
            << block.value("name", std::string("?")) << " (id "
            << block.value("block_id", -1) << ")";
    if (block.contains("lineage")) {
      lineage << " derived from block " << block.at("lineage").get<int>();
    }
    lineage << "\n";
  }

  out << "Backward passes with a parsed global gradient: " << global_count << "\n";
  std::string lineage_text = lineage.str();
  out << "Accepted structure updates:"
      << (lineage_text.empty() ? " none\n" : "\n" + lineage_text);
  out << "\nEpochs recorded: " << epochs << "\n";
  return out.str();
}

}  // namespace ann::project
