// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ann/graph.hpp"
#include "ann/runtime.hpp"

namespace ann::exec {

struct TaskInstance {
  std::string task_id;
  std::string task_prompt;
  std::optional<std::string> task_data;
  std::optional<std::string> ground_truth;
};

/// Loads a dataset file: a JSON array of {task_id, task_prompt, task_data?,
/// ground_truth?}. Enforces task_id uniqueness.
std::vector<TaskInstance> load_tasks(const std::string& path);

struct NodeRecord {
  std::string node_name;
  std::string rendered_prompt;
  std::string node_output;        // verbatim model reply
  llm::UsageRecord usage;         // this node's call alone
};

struct LayerRecord {
  int layer_index = 0;
  int selected_block_id = 0;
  std::string block_input;        // I_l
  std::string block_output;       // O_l, the end node's output
  std::vector<NodeRecord> node_records;  // in topological order
};

enum class EventKind { RoutingFallback, Warning };

const char* event_kind_name(EventKind kind);

struct TrajectoryEvent {
  int layer_index = -1;
  EventKind kind = EventKind::Warning;
  std::string detail;
};

struct Trajectory {
  std::string task_id;
  std::vector<LayerRecord> layer_records;
  std::string final_output;
  std::int64_t started_at_ms = 0;
  std::int64_t finished_at_ms = 0;
  std::vector<TrajectoryEvent> events;
};

/// First-layer input: the task prompt, joined with the data payload under
/// labeled headers when one is present.
std::string compose_initial_input(const TaskInstance& task);

/// Picks the variant to execute for one layer. Singleton pools short-circuit
/// with no model call. Otherwise the selection prompt lists every candidate's
/// structure description and the reply's tagged id is used when it names a
/// pool member; any failure falls back to active_hint, then the lowest
/// block_id, recording a RoutingFallback event on `trajectory`.
int dynamic_routing_select(const Engine& engine, const graph::LayerSlot& layer,
                           const std::string& layer_input, const TaskInstance& task,
                           Trajectory* trajectory);

/// Executes one block: nodes in topological order, each placeholder bound
/// from task state, earlier node outputs, or prior layers' outputs.
/// Independent siblings run concurrently; records keep topological order.
/// Throws Error(UnresolvableVariable) before any call for a binding that
/// cannot be satisfied, Error(NodeExecutionFailed) when a node's call fails.
LayerRecord execute_layer(const Engine& engine, const graph::BlockVariant& block,
                          int layer_index, const std::string& layer_input,
                          const TaskInstance& task,
                          const std::vector<LayerRecord>& prior_layers,
                          Trajectory* trajectory);

/// Whole forward pass: route and execute every layer, chaining each layer's
/// output into the next layer's input.
Trajectory run_forward(const Engine& engine, const graph::Network& network,
                       const TaskInstance& task);

std::string trajectory_to_json(const Trajectory& trajectory);
Trajectory trajectory_from_json(const std::string& json_text);

}  // namespace ann::exec
