// SPDX-License-Identifier: Apache-2.0
#include "ann/forward.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "ann/prompts.hpp"

namespace ann::exec {

using ordered_json = nlohmann::ordered_json;

std::vector<TaskInstance> load_tasks(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read dataset file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();

  ordered_json parsed = ordered_json::parse(buffer.str(), nullptr, false);
  if (parsed.is_discarded() || !parsed.is_array()) {
    throw Error(ErrorCode::ParseError, "dataset must be a JSON array: " + path);
  }
  std::vector<TaskInstance> tasks;
  std::set<std::string> seen;
  for (const auto& entry : parsed) {
    if (!entry.is_object() || !entry.contains("task_id") ||
        !entry.contains("task_prompt")) {
      throw Error(ErrorCode::ParseError,
                  "dataset entries need task_id and task_prompt: " + path);
    }
    TaskInstance task;
    task.task_id = entry.at("task_id").get<std::string>();
    task.task_prompt = entry.at("task_prompt").get<std::string>();
    if (entry.contains("task_data") && !entry.at("task_data").is_null()) {
      task.task_data = entry.at("task_data").get<std::string>();
    }
    if (entry.contains("ground_truth") && !entry.at("ground_truth").is_null()) {
      task.ground_truth = entry.at("ground_truth").get<std::string>();
    }
    if (!seen.insert(task.task_id).second) {
      throw Error(ErrorCode::ParseError, "duplicate task_id: " + task.task_id);
    }
    tasks.push_back(std::move(task));
  }
  return tasks;
}

const char* event_kind_name(EventKind kind) {
  switch (kind) {
    case EventKind::RoutingFallback: return "RoutingFallback";
    case EventKind::Warning: return "Warning";
  }
  return "Unknown";
}

std::string compose_initial_input(const TaskInstance& task) {
  if (task.task_data) {
    return "Task:\n" + task.task_prompt + "\n\nData:\n" + *task.task_data;
  }
  return task.task_prompt;
}

namespace {

std::string truncate_chars(const std::string& text, int budget) {
  if (budget <= 0 || text.size() <= static_cast<size_t>(budget)) return text;
  return text.substr(0, static_cast<size_t>(budget)) + "...";
}

void record_event(Trajectory* trajectory, int layer_index, EventKind kind,
                  std::string detail) {
  if (!trajectory) return;
  trajectory->events.push_back({layer_index, kind, std::move(detail)});
}

int fallback_block(const graph::LayerSlot& layer) {
  if (layer.active_hint && layer.find_block(*layer.active_hint)) {
    return *layer.active_hint;
  }
  int lowest = layer.pool.front().block_id;
  for (const auto& block : layer.pool) lowest = std::min(lowest, block.block_id);
  return lowest;
}

}  // namespace

int dynamic_routing_select(const Engine& engine, const graph::LayerSlot& layer,
                           const std::string& layer_input, const TaskInstance& task,
                           Trajectory* trajectory) {
  if (layer.pool.empty()) {
    throw Error(ErrorCode::InvalidArgument,
                "layer " + std::to_string(layer.layer_index) + " has an empty pool");
  }
  if (layer.pool.size() == 1) return layer.pool.front().block_id;

  std::string descriptions;
  for (const auto& block : layer.pool) {
    descriptions += "- block_id " + std::to_string(block.block_id) + " (" + block.name +
                    "): " + block.structure_description + "\n";
  }

  std::string task_text =
      task.task_prompt + "\n\nCurrent layer input (may be truncated):\n" +
      truncate_chars(layer_input, engine.config.selection_input_budget);

  try {
    llm::ChatRequest request;
    request.model_name = engine.config.judge_model.name;
    request.user_text =
        graph::render_prompt(prompts::block_selection(),
                             {{"task_prompt", task_text},
                              {"blocks_structure_descriptions", descriptions}});
    request.temperature = engine.config.judge_model.temperature;
    request.max_output_tokens = engine.config.judge_model.max_output_tokens;

    auto response = engine.gateway->complete(request);
    std::string tagged = llm::extract_tagged(response.text, "selected_agg_func");
    int selected = std::stoi(tagged);
    if (layer.find_block(selected)) return selected;
    int fallback = fallback_block(layer);
    record_event(trajectory, layer.layer_index, EventKind::RoutingFallback,
                 "selected id " + std::to_string(selected) +
                     " names no pool member; using block_id " +
                     std::to_string(fallback));
    return fallback;
  } catch (const std::exception& e) {
    int fallback = fallback_block(layer);
    record_event(trajectory, layer.layer_index, EventKind::RoutingFallback,
                 std::string("selection failed (") + e.what() + "); using block_id " +
                     std::to_string(fallback));
    return fallback;
  }
}

namespace {

std::string resolve_variable(const graph::VariableRef& ref, const std::string& node_name,
                             const TaskInstance& task,
                             const std::map<std::string, std::string>& completed,
                             const std::vector<LayerRecord>& prior_layers) {
  auto unresolvable = [&](const std::string& why) {
    return Error(ErrorCode::UnresolvableVariable,
                 "node '" + node_name + "' placeholder '" + ref.placeholder + "': " + why);
  };
  switch (ref.kind) {
    case graph::VariableRef::Kind::State:
      if (ref.state_key == "task_prompt") return task.task_prompt;
      if (ref.state_key == "task_id") return task.task_id;
      if (ref.state_key == "task_data") {
        if (!task.task_data) throw unresolvable("task has no data payload");
        return *task.task_data;
      }
      throw unresolvable("unknown state variable '" + ref.state_key + "'");
    case graph::VariableRef::Kind::NodeOutput: {
      auto it = completed.find(ref.node_name);
      if (it == completed.end()) {
        throw unresolvable("node '" + ref.node_name + "' has not produced output");
      }
      return it->second;
    }
    case graph::VariableRef::Kind::CrossBlockOutput: {
      const LayerRecord* record = nullptr;
      for (const auto& prior : prior_layers) {
        if (prior.layer_index == ref.layer_index) {
          record = &prior;
          break;
        }
      }
      if (!record) {
        throw unresolvable("no executed layer with index " +
                           std::to_string(ref.layer_index));
      }
      if (ref.output_key == graph::kEndOutputKey) return record->block_output;
      for (const auto& node : record->node_records) {
        if (node.node_name == ref.output_key) return node.node_output;
      }
      throw unresolvable("layer " + std::to_string(ref.layer_index) +
                         " has no node '" + ref.output_key + "'");
    }
  }
  throw unresolvable("unhandled variable kind");
}

// Nodes grouped into execution waves: a node joins the earliest wave after
// all of its in-edge sources.
std::vector<std::vector<std::string>> execution_waves(const graph::BlockVariant& block) {
  auto order = graph::topological_order(block);
  std::unordered_map<std::string, int> wave_of;
  std::vector<std::vector<std::string>> waves;
  for (const auto& name : order) {
    int wave = 0;
    for (const auto& [from, to] : block.edges) {
      if (to == name) {
        auto it = wave_of.find(from);
        if (it != wave_of.end()) wave = std::max(wave, it->second + 1);
      }
    }
    wave_of[name] = wave;
    if (static_cast<size_t>(wave) >= waves.size()) waves.resize(wave + 1);
    waves[wave].push_back(name);
  }
  return waves;
}

}  // namespace

LayerRecord execute_layer(const Engine& engine, const graph::BlockVariant& block,
                          int layer_index, const std::string& layer_input,
                          const TaskInstance& task,
                          const std::vector<LayerRecord>& prior_layers,
                          Trajectory* trajectory) {
  LayerRecord record;
  record.layer_index = layer_index;
  record.selected_block_id = block.block_id;
  record.block_input = layer_input;

  auto order = graph::topological_order(block);
  std::unordered_map<std::string, size_t> position;
  for (size_t i = 0; i < order.size(); ++i) position[order[i]] = i;
  record.node_records.resize(order.size());

  std::map<std::string, std::string> completed;

  for (const auto& wave : execution_waves(block)) {
    // Bind sequentially (deterministic errors), then call concurrently.
    struct Pending {
      const graph::NodeSpec* node;
      llm::ChatRequest request;
      std::string rendered;
    };
    std::vector<Pending> pending;
    for (const auto& name : wave) {
      const graph::NodeSpec* node = block.find_node(name);
      if (!node) {
        throw Error(ErrorCode::Internal, "topological order names missing node " + name);
      }
      std::map<std::string, std::string> bindings;
      for (const auto& ref : node->input_variables) {
        bindings[ref.placeholder] =
            resolve_variable(ref, name, task, completed, prior_layers);
      }
      std::vector<std::string> unused;
      std::string rendered;
      try {
        rendered = graph::render_prompt(node->prompt_template, bindings, &unused);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::MissingBinding) {
          throw Error(ErrorCode::UnresolvableVariable,
                      "node '" + name + "': " + e.what());
        }
        throw;
      }
      for (const auto& warning : unused) {
        record_event(trajectory, layer_index, EventKind::Warning,
                     "node '" + name + "': " + warning);
      }

      llm::ChatRequest request;
      request.model_name = engine.config.task_model.name;
      std::string system;
      if (!node->agent_role.empty()) system = "You are " + node->agent_role + ".";
      if (!node->constraints.empty()) {
        if (!system.empty()) system += "\n";
        system += "Constraints: " + node->constraints;
      }
      if (!node->output_format.empty()) {
        if (!system.empty()) system += "\n";
        system += "Reply format: " + node->output_format;
      }
      if (!system.empty()) request.system_text = system;
      request.user_text = rendered;
      request.temperature =
          node->temperature.value_or(engine.config.task_model.temperature);
      request.max_output_tokens = engine.config.task_model.max_output_tokens;
      pending.push_back({node, std::move(request), std::move(rendered)});
    }

    std::vector<llm::ChatResponse> responses(pending.size());
    std::vector<std::exception_ptr> failures(pending.size());
    if (pending.size() == 1) {
      try {
        responses[0] = engine.gateway->complete(pending[0].request);
      } catch (...) {
        failures[0] = std::current_exception();
      }
    } else {
      std::vector<std::thread> threads;
      threads.reserve(pending.size());
      for (size_t i = 0; i < pending.size(); ++i) {
        threads.emplace_back([&, i] {
          try {
            responses[i] = engine.gateway->complete(pending[i].request);
          } catch (...) {
            failures[i] = std::current_exception();
          }
        });
      }
      for (auto& thread : threads) thread.join();
    }

    for (size_t i = 0; i < pending.size(); ++i) {
      if (!failures[i]) continue;
      try {
        std::rethrow_exception(failures[i]);
      } catch (const std::exception& e) {
        throw Error(ErrorCode::NodeExecutionFailed,
                    "node '" + pending[i].node->node_name + "': " + e.what());
      }
    }

    for (size_t i = 0; i < pending.size(); ++i) {
      NodeRecord node_record;
      node_record.node_name = pending[i].node->node_name;
      node_record.rendered_prompt = pending[i].rendered;
      node_record.node_output = responses[i].text;
      node_record.usage = responses[i].call;
      completed[node_record.node_name] = node_record.node_output;
      record.node_records[position[node_record.node_name]] = std::move(node_record);
    }
  }

  auto end_it = completed.find(block.end_node);
  if (end_it == completed.end()) {
    throw Error(ErrorCode::Internal, "end node '" + block.end_node + "' never executed");
  }
  record.block_output = end_it->second;
  return record;
}

Trajectory run_forward(const Engine& engine, const graph::Network& network,
                       const TaskInstance& task) {
  if (network.layers.empty()) {
    throw Error(ErrorCode::InvalidArgument, "network has no layers");
  }

  Trajectory trajectory;
  trajectory.task_id = task.task_id;
  trajectory.started_at_ms = engine.clock->now_ms();

  std::string layer_input = compose_initial_input(task);
  for (const auto& layer : network.layers) {
    try {
      int selected =
          dynamic_routing_select(engine, layer, layer_input, task, &trajectory);
      const graph::BlockVariant* block = layer.find_block(selected);
      if (!block) {
        throw Error(ErrorCode::Internal,
                    "routing returned unknown block_id " + std::to_string(selected));
      }
      LayerRecord record =
          execute_layer(engine, *block, layer.layer_index, layer_input, task,
                        trajectory.layer_records, &trajectory);
      layer_input = record.block_output;
      trajectory.layer_records.push_back(std::move(record));
    } catch (const Error& e) {
      throw Error(e.code(),
                  "layer " + std::to_string(layer.layer_index) + ": " + e.what());
    }
  }

  trajectory.final_output = trajectory.layer_records.back().block_output;
  trajectory.finished_at_ms = engine.clock->now_ms();
  return trajectory;
}

namespace {

ordered_json usage_to_json(const llm::UsageRecord& usage) {
  return ordered_json{{"input_tokens", usage.input_tokens},
                      {"output_tokens", usage.output_tokens},
                      {"cost_estimate", usage.cumulative_cost_estimate}};
}

llm::UsageRecord usage_from_json(const ordered_json& in) {
  llm::UsageRecord usage;
  usage.input_tokens = in.value("input_tokens", std::int64_t{0});
  usage.output_tokens = in.value("output_tokens", std::int64_t{0});
  usage.cumulative_cost_estimate = in.value("cost_estimate", 0.0);
  return usage;
}

}  // namespace

std::string trajectory_to_json(const Trajectory& trajectory) {
  ordered_json out;
  out["task_id"] = trajectory.task_id;
  out["started_at_ms"] = trajectory.started_at_ms;
  out["finished_at_ms"] = trajectory.finished_at_ms;
  out["final_output"] = trajectory.final_output;
  out["layers"] = ordered_json::array();
  for (const auto& layer : trajectory.layer_records) {
    ordered_json layer_json;
    layer_json["layer_index"] = layer.layer_index;
    layer_json["selected_block_id"] = layer.selected_block_id;
    layer_json["block_input"] = layer.block_input;
    layer_json["block_output"] = layer.block_output;
    layer_json["nodes"] = ordered_json::array();
    for (const auto& node : layer.node_records) {
      layer_json["nodes"].push_back({{"node_name", node.node_name},
                                     {"rendered_prompt", node.rendered_prompt},
                                     {"node_output", node.node_output},
                                     {"usage", usage_to_json(node.usage)}});
    }
    out["layers"].push_back(std::move(layer_json));
  }
  out["events"] = ordered_json::array();
  for (const auto& event : trajectory.events) {
    out["events"].push_back({{"layer_index", event.layer_index},
                             {"kind", event_kind_name(event.kind)},
                             {"detail", event.detail}});
  }
  return out.dump(2) + "\n";
}

Trajectory trajectory_from_json(const std::string& json_text) {
  ordered_json in = ordered_json::parse(json_text, nullptr, false);
  if (in.is_discarded() || !in.is_object()) {
    throw Error(ErrorCode::ParseError, "trajectory: malformed JSON");
  }
  Trajectory trajectory;
  try {
    trajectory.task_id = in.at("task_id").get<std::string>();
    trajectory.started_at_ms = in.value("started_at_ms", std::int64_t{0});
    trajectory.finished_at_ms = in.value("finished_at_ms", std::int64_t{0});
    trajectory.final_output = in.value("final_output", std::string());
    for (const auto& layer_json : in.value("layers", ordered_json::array())) {
      LayerRecord layer;
      layer.layer_index = layer_json.at("layer_index").get<int>();
      layer.selected_block_id = layer_json.at("selected_block_id").get<int>();
      layer.block_input = layer_json.value("block_input", std::string());
      layer.block_output = layer_json.value("block_output", std::string());
      for (const auto& node_json : layer_json.value("nodes", ordered_json::array())) {
        NodeRecord node;
        node.node_name = node_json.at("node_name").get<std::string>();
        node.rendered_prompt = node_json.value("rendered_prompt", std::string());
        node.node_output = node_json.value("node_output", std::string());
        if (node_json.contains("usage")) {
          node.usage = usage_from_json(node_json.at("usage"));
        }
        layer.node_records.push_back(std::move(node));
      }
      trajectory.layer_records.push_back(std::move(layer));
    }
    for (const auto& event_json : in.value("events", ordered_json::array())) {
      TrajectoryEvent event;
      event.layer_index = event_json.value("layer_index", -1);
      std::string kind = event_json.value("kind", "Warning");
      event.kind =
          kind == "RoutingFallback" ? EventKind::RoutingFallback : EventKind::Warning;
      event.detail = event_json.value("detail", std::string());
      trajectory.events.push_back(std::move(event));
    }
  } catch (const ordered_json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("trajectory: ") + e.what());
  }
  return trajectory;
}

}  // namespace ann::exec
