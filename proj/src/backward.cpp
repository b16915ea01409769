// SPDX-License-Identifier: Apache-2.0
#include "ann/backward.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ann/prompts.hpp"

namespace ann::opt {

using ordered_json = nlohmann::ordered_json;

std::optional<std::string> VelocityStore::get(int layer_index, int block_id) const {
  auto it = entries_.find({layer_index, block_id});
  if (it == entries_.end()) return std::nullopt;
  return it->second.velocity;
}

void VelocityStore::put(int layer_index, int block_id, std::string velocity, int step) {
  entries_[{layer_index, block_id}] = Entry{std::move(velocity), step};
}

void VelocityStore::clear() { entries_.clear(); }

std::string report_to_json(const GlobalLossReport& report) {
  ordered_json out;
  out["global_analysis"] = report.global_analysis;
  out["blocks"] = ordered_json::array();
  for (const auto& block : report.per_block) {
    ordered_json entry;
    entry["layer_index"] = block.layer_index;
    entry["block_name"] = block.block_name;
    if (block.structure_suggestion) {
      entry["structure_suggestion"] = *block.structure_suggestion;
    }
    entry["prompt_suggestions"] = ordered_json::array();
    for (const auto& suggestion : block.prompt_suggestions) {
      entry["prompt_suggestions"].push_back(
          {{"node_name", suggestion.node_name}, {"suggestion", suggestion.suggestion}});
    }
    out["blocks"].push_back(std::move(entry));
  }
  return out.dump(2) + "\n";
}

namespace {

// Models wrap JSON in markdown fences or prose; cut to the outermost object.
std::string isolate_json_object(const std::string& text) {
  size_t begin = text.find('{');
  size_t end = text.rfind('}');
  if (begin == std::string::npos || end == std::string::npos || end < begin) {
    return text;
  }
  return text.substr(begin, end - begin + 1);
}

GlobalLossReport parse_global_report(const std::string& reply) {
  std::string body;
  try {
    body = llm::extract_tagged(reply, "output_format");
  } catch (const Error&) {
    body = reply;
  }
  ordered_json parsed = ordered_json::parse(isolate_json_object(body), nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    throw Error(ErrorCode::GradientUnparseable, "reply is not a JSON report");
  }
  if (!parsed.contains("global_analysis") || !parsed.at("global_analysis").is_string()) {
    throw Error(ErrorCode::GradientUnparseable, "reply lacks global_analysis");
  }

  GlobalLossReport report;
  report.global_analysis = parsed.at("global_analysis").get<std::string>();
  if (parsed.contains("blocks")) {
    if (!parsed.at("blocks").is_array()) {
      throw Error(ErrorCode::GradientUnparseable, "blocks must be an array");
    }
    for (const auto& entry : parsed.at("blocks")) {
      if (!entry.is_object() || !entry.contains("layer_index") ||
          !entry.at("layer_index").is_number_integer()) {
        throw Error(ErrorCode::GradientUnparseable,
                    "block entry lacks an integer layer_index");
      }
      BlockFeedback feedback;
      feedback.layer_index = entry.at("layer_index").get<int>();
      feedback.block_name = entry.value("block_name", std::string());
      if (entry.contains("structure_suggestion") &&
          entry.at("structure_suggestion").is_string()) {
        std::string suggestion = entry.at("structure_suggestion").get<std::string>();
        if (!suggestion.empty()) feedback.structure_suggestion = std::move(suggestion);
      }
      if (entry.contains("prompt_suggestions")) {
        if (!entry.at("prompt_suggestions").is_array()) {
          throw Error(ErrorCode::GradientUnparseable,
                      "prompt_suggestions must be an array");
        }
        for (const auto& suggestion : entry.at("prompt_suggestions")) {
          if (!suggestion.is_object() || !suggestion.contains("node_name") ||
              !suggestion.contains("suggestion")) {
            throw Error(ErrorCode::GradientUnparseable,
                        "prompt suggestion needs node_name and suggestion");
          }
          feedback.prompt_suggestions.push_back(
              {suggestion.at("node_name").get<std::string>(),
               suggestion.at("suggestion").get<std::string>()});
        }
      }
      report.per_block.push_back(std::move(feedback));
    }
  }
  return report;
}

}  // namespace

GlobalLossReport report_from_json(const std::string& json_text) {
  return parse_global_report(json_text);
}

std::string render_trajectory_log(const graph::Network& network,
                                  const exec::Trajectory& trajectory) {
  std::ostringstream log;
  for (const auto& record : trajectory.layer_records) {
    const graph::BlockVariant* block = nullptr;
    for (const auto& layer : network.layers) {
      if (layer.layer_index == record.layer_index) {
        block = layer.find_block(record.selected_block_id);
        break;
      }
    }
    log << "Layer " << record.layer_index << ", block "
        << (block ? block->name : std::to_string(record.selected_block_id)) << ":\n";
    if (block && !block->structure_description.empty()) {
      log << "block_description: " << block->structure_description << "\n";
    }
    log << "block_input: " << record.block_input << "\n";
    log << "block_output: " << record.block_output << "\n";
    for (const auto& node : record.node_records) {
      log << "  node " << node.node_name << "\n";
      log << "    node_input: " << node.rendered_prompt << "\n";
      log << "    node_output: " << node.node_output << "\n";
    }
    log << "\n";
  }
  return log.str();
}

std::string render_block_log(const graph::BlockVariant& block,
                             const exec::LayerRecord* record) {
  std::ostringstream log;
  log << "structure: " << graph::block_to_json(block);
  if (record) {
    log << "block_input: " << record->block_input << "\n";
    log << "block_output: " << record->block_output << "\n";
    for (const auto& node : record->node_records) {
      log << "node " << node.node_name << "\n";
      log << "  node_input: " << node.rendered_prompt << "\n";
      log << "  node_output: " << node.node_output << "\n";
    }
  }
  return log.str();
}

GlobalLossReport compute_global_gradient(
    const Engine& engine, const graph::Network& network,
    const exec::Trajectory& trajectory, const eval::EvalOutcome& outcome,
    const std::optional<std::string>& canonical_solution) {
  std::ostringstream consolidated;
  consolidated << "<final result>\n"
               << (outcome.passed ? "passed" : "failed") << "\n"
               << outcome.raw_judge_text << "\n</final result>\n\n"
               << "<canonical solution>\n"
               << canonical_solution.value_or("(not provided)")
               << "\n</canonical solution>\n\n"
               << "<generated solution>\n"
               << trajectory.final_output << "\n</generated solution>\n\n"
               << "<task description>\n"
               << (trajectory.layer_records.empty()
                       ? std::string()
                       : trajectory.layer_records.front().block_input)
               << "\n</task description>\n\n"
               << "<workflow trajectory>\n"
               << render_trajectory_log(network, trajectory)
               << "</workflow trajectory>";

  llm::ChatRequest request;
  request.model_name = engine.config.optimizer_model.name;
  request.user_text = graph::render_prompt(
      prompts::global_gradient(),
      {{"initial_solution", consolidated.str()},
       {"example_global_loss_format", prompts::global_loss_format()}});
  request.temperature = engine.config.optimizer_model.temperature;
  request.max_output_tokens = engine.config.optimizer_model.max_output_tokens;

  auto response = engine.gateway->complete(request);
  return parse_global_report(response.text);
}

GlobalUpdateResult global_gradient_update(const graph::Network& network,
                                          const GlobalLossReport& report,
                                          const exec::Trajectory& trajectory) {
  (void)trajectory;
  GlobalUpdateResult result;
  result.network = network;

  for (const auto& feedback : report.per_block) {
    graph::LayerSlot* layer = nullptr;
    for (auto& candidate : result.network.layers) {
      if (candidate.layer_index == feedback.layer_index) {
        layer = &candidate;
        break;
      }
    }
    if (!layer) {
      result.warnings.push_back("report names layer " +
                                std::to_string(feedback.layer_index) +
                                " which does not exist; entry skipped");
      continue;
    }

    std::ostringstream pending;
    if (feedback.structure_suggestion) {
      pending << "structure_suggestion: " << *feedback.structure_suggestion << "\n";
    }
    for (const auto& suggestion : feedback.prompt_suggestions) {
      pending << "prompt_suggestion (" << suggestion.node_name
              << "): " << suggestion.suggestion << "\n";
    }
    std::string text = pending.str();
    layer->pending_feedback = text.empty() ? "(flagged without suggestions)" : text;
    result.flagged_layers.insert(feedback.layer_index);
  }

  if (!result.flagged_layers.empty()) ++result.network.revision;
  return result;
}

namespace {

bool contains_arrow(const std::string& text) {
  return text.find("->") != std::string::npos ||
         text.find("\xE2\x86\x92") != std::string::npos;  // UTF-8 right arrow
}

std::vector<std::pair<std::string, std::string>> parse_edges(const ordered_json& edges,
                                                             const char* field) {
  std::vector<std::pair<std::string, std::string>> out;
  if (!edges.is_array()) {
    throw Error(ErrorCode::LayerwiseUnparseable,
                std::string(field) + " must be an array");
  }
  for (const auto& edge : edges) {
    if (edge.is_string()) {
      std::string text = edge.get<std::string>();
      if (contains_arrow(text)) {
        throw Error(ErrorCode::LayerwiseUnparseable,
                    std::string(field) + " uses arrow notation: " + text);
      }
      throw Error(ErrorCode::LayerwiseUnparseable,
                  std::string(field) + " entries must be two-element arrays");
    }
    if (!edge.is_array() || edge.size() != 2 || !edge[0].is_string() ||
        !edge[1].is_string()) {
      throw Error(ErrorCode::LayerwiseUnparseable,
                  std::string(field) + " entries must be two-element arrays");
    }
    out.emplace_back(edge[0].get<std::string>(), edge[1].get<std::string>());
  }
  return out;
}

graph::NodeSpec parse_proposed_node(const ordered_json& in) {
  if (!in.is_object() || !in.contains("node_name")) {
    throw Error(ErrorCode::LayerwiseUnparseable, "node entry lacks node_name");
  }
  graph::NodeSpec node;
  node.node_name = in.at("node_name").get<std::string>();
  node.agent_role = in.value("agent", in.value("agent_role", std::string()));
  node.prompt_template = in.value("prompt_template", std::string());
  node.output_format = in.value("output_format", std::string());
  node.constraints = in.value("constraints", std::string());
  const char* variables_key = in.contains("input_variables") ? "input_variables"
                              : in.contains("variable_sources") ? "variable_sources"
                                                                : nullptr;
  if (variables_key) {
    const auto& variables = in.at(variables_key);
    if (!variables.is_array()) {
      throw Error(ErrorCode::LayerwiseUnparseable,
                  "node '" + node.node_name + "': input_variables must be an array");
    }
    for (const auto& variable : variables) {
      if (!variable.is_object() || !variable.contains("placeholder")) {
        throw Error(ErrorCode::LayerwiseUnparseable,
                    "node '" + node.node_name +
                        "': variable entries need a placeholder");
      }
      std::string placeholder = variable.at("placeholder").get<std::string>();
      if (variable.contains("state")) {
        node.input_variables.push_back(
            graph::VariableRef::state(placeholder, variable.at("state").get<std::string>()));
      } else if (variable.contains("node")) {
        node.input_variables.push_back(graph::VariableRef::node_output(
            placeholder, variable.at("node").get<std::string>()));
      } else if (variable.contains("layer")) {
        node.input_variables.push_back(graph::VariableRef::cross_block(
            placeholder, variable.at("layer").get<int>(),
            variable.value("output", std::string(graph::kEndOutputKey))));
      } else {
        throw Error(ErrorCode::LayerwiseUnparseable,
                    "node '" + node.node_name + "' placeholder '" + placeholder +
                        "' names no source (state/node/layer)");
      }
    }
  }
  return node;
}

// Parses the optimizer's JSON reply into critique + optional structure and
// enforces the node-addition budget against the parent.
LocalGradient parse_layerwise_reply(const std::string& reply,
                                    const graph::BlockVariant& parent, int layer_index,
                                    int new_block_id, int max_node_additions) {
  ordered_json parsed = ordered_json::parse(isolate_json_object(reply), nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    throw Error(ErrorCode::LayerwiseUnparseable, "reply is not a JSON object");
  }
  if (contains_arrow(parsed.dump())) {
    // One sweep catches arrows hidden in any structural field.
    if (parsed.contains("edges") && contains_arrow(parsed.at("edges").dump())) {
      throw Error(ErrorCode::LayerwiseUnparseable, "edges use arrow notation");
    }
    if (parsed.contains("all_edges_now") &&
        contains_arrow(parsed.at("all_edges_now").dump())) {
      throw Error(ErrorCode::LayerwiseUnparseable, "all_edges_now uses arrow notation");
    }
  }

  LocalGradient gradient;
  gradient.layer_index = layer_index;
  gradient.target_block_id = parent.block_id;
  gradient.critique = parsed.value("critique", std::string());

  bool has_structure = parsed.contains("nodes") && parsed.at("nodes").is_array() &&
                       !parsed.at("nodes").empty();
  if (!has_structure) {
    if (gradient.critique.empty()) {
      throw Error(ErrorCode::LayerwiseUnparseable,
                  "reply carries neither critique nor structure");
    }
    return gradient;
  }

  graph::BlockVariant proposed;
  if (parsed.contains("block_id") && parsed.at("block_id").is_number_integer()) {
    proposed.block_id = parsed.at("block_id").get<int>();
  } else {
    proposed.block_id = new_block_id;
  }
  proposed.name = parsed.value("name", parent.base_name() +
                                           std::to_string(proposed.block_id));
  for (const auto& node : parsed.at("nodes")) {
    proposed.nodes.push_back(parse_proposed_node(node));
  }
  if (parsed.contains("edges")) {
    proposed.edges = parse_edges(parsed.at("edges"), "edges");
  }
  if (!parsed.contains("entry_node") || !parsed.contains("end_node")) {
    throw Error(ErrorCode::LayerwiseUnparseable,
                "structure proposal lacks entry_node or end_node");
  }
  proposed.entry_node = parsed.at("entry_node").get<std::string>();
  proposed.end_node = parsed.at("end_node").get<std::string>();
  proposed.structure_description =
      parsed.value("block_structure_description", std::string());
  if (parsed.contains("block_structure_description_details") &&
      parsed.at("block_structure_description_details").is_array()) {
    for (const auto& detail : parsed.at("block_structure_description_details")) {
      if (detail.is_string()) {
        proposed.structure_description_details.push_back(detail.get<std::string>());
      }
    }
  }
  if (parsed.contains("all_edges_now")) {
    parse_edges(parsed.at("all_edges_now"), "all_edges_now");  // arrow/shape check only
  }

  int additions = 0;
  for (const auto& node : proposed.nodes) {
    if (!parent.find_node(node.node_name)) ++additions;
  }
  if (additions > max_node_additions) {
    throw Error(ErrorCode::EditBudgetExceeded,
                "proposal adds " + std::to_string(additions) + " nodes, budget " +
                    std::to_string(max_node_additions));
  }

  gradient.proposed = std::move(proposed);
  return gradient;
}

}  // namespace

LocalGradient compute_local_gradient(const Engine& engine, int layer_index,
                                     const graph::BlockVariant& block,
                                     const exec::Trajectory& trajectory,
                                     const GlobalLossReport& report, double beta,
                                     int new_block_id,
                                     const std::optional<std::string>& canonical_solution,
                                     const std::vector<std::string>& prior_failures) {
  std::ostringstream global_feedback;
  global_feedback << report.global_analysis;
  for (const auto& feedback : report.per_block) {
    if (feedback.layer_index != layer_index) continue;
    if (feedback.structure_suggestion) {
      global_feedback << "\nstructure_suggestion: " << *feedback.structure_suggestion;
    }
    for (const auto& suggestion : feedback.prompt_suggestions) {
      global_feedback << "\nprompt_suggestion (" << suggestion.node_name
                      << "): " << suggestion.suggestion;
    }
  }

  const exec::LayerRecord* record = nullptr;
  for (const auto& candidate : trajectory.layer_records) {
    if (candidate.layer_index == layer_index) {
      record = &candidate;
      break;
    }
  }

  std::set<std::string> roles;
  for (const auto& node : block.nodes) {
    if (!node.agent_role.empty()) roles.insert(node.agent_role);
  }
  std::string available_agents;
  for (const auto& role : roles) available_agents += "- " + role + "\n";
  available_agents += "- any new agent role you define, with explicit constraints\n";

  std::string rendered = graph::render_prompt(
      prompts::layerwise_gradient(),
      {{"block_name", block.name},
       {"global_loss_feedback", global_feedback.str()},
       {"blocks_log", render_block_log(block, record)},
       {"canonical_solution", canonical_solution.value_or("(not provided)")},
       {"task_prompt", trajectory.layer_records.empty()
                           ? std::string()
                           : trajectory.layer_records.front().block_input},
       {"available_agents", available_agents},
       {"new_block_id", std::to_string(new_block_id)},
       {"layerwise_loss_format", prompts::layerwise_loss_format()},
       {"emphasis_directive", prompts::emphasis_directive(beta)},
       {"edit_scope_directive",
        prompts::edit_scope_directive(engine.config.optimizer.eta,
                                      engine.config.optimizer.max_node_additions)}});
  if (!prior_failures.empty()) {
    rendered += "\nPrevious attempt failures (repair these exact problems):\n";
    for (const auto& failure : prior_failures) rendered += "- " + failure + "\n";
  }

  llm::ChatRequest request;
  request.model_name = engine.config.optimizer_model.name;
  request.user_text = rendered;
  request.temperature = engine.config.optimizer_model.temperature;
  request.max_output_tokens = engine.config.optimizer_model.max_output_tokens;

  auto response = engine.gateway->complete(request);
  return parse_layerwise_reply(response.text, block, layer_index, new_block_id,
                               engine.config.optimizer.max_node_additions);
}

MomentumInputs momentum_inputs_from(const graph::BlockVariant& block,
                                    const exec::LayerRecord* record,
                                    const std::string& task_result) {
  MomentumInputs inputs;
  inputs.current_block_json = graph::block_to_json(block);
  inputs.task_result = task_result;
  if (record) {
    inputs.block_input = record->block_input;
    inputs.block_output = record->block_output;
    std::ostringstream nodes_info;
    for (const auto& node : record->node_records) {
      nodes_info << node.node_name << " input: " << node.rendered_prompt << "\n"
                 << node.node_name << " output: " << node.node_output << "\n";
    }
    inputs.nodes_info = nodes_info.str();
  }
  return inputs;
}

LocalGradient apply_momentum(const Engine& engine, int layer_index, int block_id,
                             const LocalGradient& current, VelocityStore& velocity_store,
                             double alpha, const MomentumInputs& inputs, int step,
                             std::vector<std::string>* warnings) {
  auto previous = velocity_store.get(layer_index, block_id);
  if (!previous) {
    velocity_store.put(layer_index, block_id, current.critique, step);
    return current;
  }

  std::string rendered = graph::render_prompt(
      prompts::momentum_merge(), {{"block_name", std::to_string(block_id)},
                                  {"current_block", inputs.current_block_json},
                                  {"current_task_results", inputs.task_result},
                                  {"current_gradient", current.critique},
                                  {"velocity", *previous},
                                  {"block_input", inputs.block_input},
                                  {"block_output", inputs.block_output},
                                  {"nodes_info", inputs.nodes_info}});
  // The scalar momentum coefficient has no direct textual meaning; it maps
  // to a weighting instruction the same way the blend factor does.
  if (alpha >= 2.0 / 3.0) {
    rendered += "\nWeighting guidance: prioritize the current feedback.";
  } else if (alpha >= 1.0 / 3.0) {
    rendered +=
        "\nWeighting guidance: balance the current feedback with the previous "
        "adjustment direction.";
  } else {
    rendered += "\nWeighting guidance: prioritize the previous adjustment direction.";
  }

  llm::ChatRequest request;
  request.model_name = engine.config.optimizer_model.name;
  request.user_text = rendered;
  request.temperature = engine.config.optimizer_model.temperature;
  request.max_output_tokens = engine.config.optimizer_model.max_output_tokens;

  LocalGradient adjusted = current;
  try {
    auto response = engine.gateway->complete(request);
    std::string merged = llm::extract_tagged(response.text, "adjusted feedback");
    adjusted.critique = merged;
    velocity_store.put(layer_index, block_id, merged, step);
  } catch (const Error& e) {
    if (warnings) {
      warnings->push_back("momentum merge fell back to the current gradient: " +
                          std::string(e.what()));
    }
    velocity_store.put(layer_index, block_id, current.critique, step);
  }
  return adjusted;
}

UpdateResult local_gradient_update(graph::LayerSlot& layer,
                                   const graph::BlockVariant& parent,
                                   const LocalGradient& gradient,
                                   const OptimizerConfig& config,
                                   const ProposeFn& propose,
                                   const PerformanceFn& performance) {
  UpdateResult result;

  for (int attempt = 1; attempt <= config.max_update_attempts; ++attempt) {
    result.attempts_used = attempt;
    std::string prefix = "attempt " + std::to_string(attempt) + ": ";

    std::optional<graph::BlockVariant> candidate;
    if (attempt == 1 && gradient.proposed) {
      candidate = gradient.proposed;
    } else {
      if (!propose) {
        result.reasons.push_back(prefix + "no optimizer available for a retry");
        break;
      }
      try {
        ++result.optimizer_calls;
        LocalGradient retry = propose(result.reasons);
        if (!retry.proposed) {
          result.reasons.push_back(prefix + "optimizer returned no structure proposal");
          continue;
        }
        candidate = std::move(retry.proposed);
      } catch (const std::exception& e) {
        result.reasons.push_back(prefix + e.what());
        continue;
      }
    }

    // Canonical identity is assigned here, never trusted from the model.
    candidate->block_id = layer.max_block_id() + 1;
    candidate->name = parent.base_name() + std::to_string(candidate->block_id);
    candidate->lineage = parent.block_id;

    auto report = graph::validate_block(*candidate, layer.pool);
    if (!report.passed) {
      for (const auto& failure : report.failures) {
        result.reasons.push_back(prefix +
                                 std::string(graph::check_kind_name(failure.check)) +
                                 ": " + failure.detail);
      }
      continue;
    }

    if (performance) {
      std::string why;
      bool ok = false;
      try {
        ok = performance(*candidate, &why);
      } catch (const std::exception& e) {
        why = e.what();
      }
      if (!ok) {
        result.reasons.push_back(prefix + "performance: " +
                                 (why.empty() ? "candidate did not match incumbent" : why));
        continue;
      }
    }

    layer.pool.push_back(*candidate);
    layer.active_hint = candidate->block_id;
    result.accepted = true;
    result.new_block = std::move(candidate);
    return result;
  }

  return result;
}

bool validate_performance(const Engine& engine, const graph::Network& network,
                          int layer_index, const graph::BlockVariant& candidate,
                          const graph::BlockVariant& incumbent,
                          const std::vector<exec::TaskInstance>& validation_tasks,
                          int sample_size, std::uint64_t seed, std::string* detail) {
  if (validation_tasks.empty()) {
    if (detail) *detail = "no validation tasks";
    return false;
  }

  std::vector<size_t> indices(validation_tasks.size());
  for (size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(indices.begin(), indices.end(), rng);
  size_t take = std::min<size_t>(indices.size(), static_cast<size_t>(sample_size));
  indices.resize(take);
  std::sort(indices.begin(), indices.end());  // stable task order within the sample

  auto pinned = [&](const graph::BlockVariant& variant) {
    graph::Network copy = network;
    for (auto& layer : copy.layers) {
      if (layer.layer_index == layer_index) {
        layer.pool = {variant};
        layer.active_hint = variant.block_id;
      }
    }
    return copy;
  };

  auto run_sample = [&](const graph::Network& pinned_network, bool strict,
                        std::vector<eval::EvalOutcome>* outcomes) {
    for (size_t index : indices) {
      const auto& task = validation_tasks[index];
      try {
        auto trajectory = exec::run_forward(engine, pinned_network, task);
        outcomes->push_back(eval::evaluate_task(engine, task, trajectory.final_output));
      } catch (const std::exception& e) {
        if (strict) {
          if (detail) {
            *detail = "candidate failed on task '" + task.task_id + "': " + e.what();
          }
          return false;
        }
        eval::EvalOutcome failed;
        failed.kind = outcomes->empty() ? eval::EvalOutcome::Kind::Verdict
                                        : outcomes->front().kind;
        failed.passed = false;
        failed.diagnostic = e.what();
        outcomes->push_back(failed);
      }
    }
    return true;
  };

  std::vector<eval::EvalOutcome> candidate_outcomes;
  if (!run_sample(pinned(candidate), true, &candidate_outcomes)) return false;
  std::vector<eval::EvalOutcome> incumbent_outcomes;
  run_sample(pinned(incumbent), false, &incumbent_outcomes);

  double candidate_metric = eval::dataset_metric(candidate_outcomes);
  double incumbent_metric = eval::dataset_metric(incumbent_outcomes);
  if (detail) {
    *detail = "candidate " + std::to_string(candidate_metric) + " vs incumbent " +
              std::to_string(incumbent_metric);
  }
  return candidate_metric >= incumbent_metric;
}

}  // namespace ann::opt
