// SPDX-License-Identifier: Apache-2.0
#include "ann/graph.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace ann::graph {

using ordered_json = nlohmann::ordered_json;

VariableRef VariableRef::state(std::string placeholder, std::string key) {
  VariableRef ref;
  ref.placeholder = std::move(placeholder);
  ref.kind = Kind::State;
  ref.state_key = std::move(key);
  return ref;
}

VariableRef VariableRef::node_output(std::string placeholder, std::string node) {
  VariableRef ref;
  ref.placeholder = std::move(placeholder);
  ref.kind = Kind::NodeOutput;
  ref.node_name = std::move(node);
  return ref;
}

VariableRef VariableRef::cross_block(std::string placeholder, int layer, std::string key) {
  VariableRef ref;
  ref.placeholder = std::move(placeholder);
  ref.kind = Kind::CrossBlockOutput;
  ref.layer_index = layer;
  ref.output_key = std::move(key);
  return ref;
}

const std::vector<std::string>& allowed_state_keys() {
  static const std::vector<std::string> keys = {"task_data", "task_prompt", "task_id"};
  return keys;
}

const NodeSpec* BlockVariant::find_node(const std::string& node_name) const {
  for (const auto& node : nodes) {
    if (node.node_name == node_name) return &node;
  }
  return nullptr;
}

std::string BlockVariant::base_name() const {
  size_t end = name.size();
  while (end > 0 && std::isdigit(static_cast<unsigned char>(name[end - 1]))) --end;
  return name.substr(0, end);
}

const BlockVariant* LayerSlot::find_block(int block_id) const {
  for (const auto& block : pool) {
    if (block.block_id == block_id) return &block;
  }
  return nullptr;
}

int LayerSlot::max_block_id() const {
  int max_id = 0;
  for (const auto& block : pool) max_id = std::max(max_id, block.block_id);
  return max_id;
}

const char* check_kind_name(CheckKind kind) {
  switch (kind) {
    case CheckKind::VariableSources: return "VariableSources";
    case CheckKind::Format: return "Format";
    case CheckKind::Edges: return "Edges";
    case CheckKind::Acyclicity: return "Acyclicity";
    case CheckKind::Uniqueness: return "Uniqueness";
  }
  return "Unknown";
}

void ValidationReport::add(CheckKind check, std::string detail) {
  passed = false;
  failures.push_back({check, std::move(detail)});
}

namespace {

// Topological order without throwing; returns nullopt on a cycle.
// Frontier selection: entry node first whenever available, then name order.
std::optional<std::vector<std::string>> try_topological_order(const BlockVariant& block) {
  std::unordered_map<std::string, int> in_degree;
  std::unordered_map<std::string, std::vector<std::string>> adjacency;
  for (const auto& node : block.nodes) in_degree[node.node_name] = 0;
  for (const auto& [from, to] : block.edges) {
    if (!in_degree.count(from) || !in_degree.count(to)) continue;  // reported by Edges check
    adjacency[from].push_back(to);
    ++in_degree[to];
  }

  auto precedes = [&block](const std::string& a, const std::string& b) {
    bool a_entry = a == block.entry_node;
    bool b_entry = b == block.entry_node;
    if (a_entry != b_entry) return a_entry;
    return a < b;
  };
  std::set<std::string, decltype(precedes)> frontier(precedes);
  for (const auto& [name, degree] : in_degree) {
    if (degree == 0) frontier.insert(name);
  }

  std::vector<std::string> order;
  order.reserve(block.nodes.size());
  while (!frontier.empty()) {
    std::string current = *frontier.begin();
    frontier.erase(frontier.begin());
    order.push_back(current);
    auto it = adjacency.find(current);
    if (it == adjacency.end()) continue;
    for (const auto& next : it->second) {
      if (--in_degree[next] == 0) frontier.insert(next);
    }
  }
  if (order.size() != block.nodes.size()) return std::nullopt;
  return order;
}

std::unordered_set<std::string> node_name_set(const BlockVariant& block) {
  std::unordered_set<std::string> names;
  for (const auto& node : block.nodes) names.insert(node.node_name);
  return names;
}

void check_variable_sources(const BlockVariant& block, ValidationReport& report) {
  const auto names = node_name_set(block);
  const auto& state_keys = allowed_state_keys();

  // Positions in topological order, when one exists; precedence of
  // NodeOutput references is only decidable on an acyclic graph.
  std::unordered_map<std::string, size_t> position;
  if (auto order = try_topological_order(block)) {
    for (size_t i = 0; i < order->size(); ++i) position[(*order)[i]] = i;
  }

  for (const auto& node : block.nodes) {
    for (const auto& ref : node.input_variables) {
      switch (ref.kind) {
        case VariableRef::Kind::State:
          if (std::find(state_keys.begin(), state_keys.end(), ref.state_key) ==
              state_keys.end()) {
            report.add(CheckKind::VariableSources,
                       "node '" + node.node_name + "' placeholder '" + ref.placeholder +
                           "': unknown state variable '" + ref.state_key + "'");
          }
          break;
        case VariableRef::Kind::NodeOutput: {
          if (!names.count(ref.node_name)) {
            report.add(CheckKind::VariableSources,
                       "node '" + node.node_name + "' placeholder '" + ref.placeholder +
                           "': references missing node '" + ref.node_name + "'");
            break;
          }
          if (ref.node_name == node.node_name) {
            report.add(CheckKind::VariableSources,
                       "node '" + node.node_name + "' placeholder '" + ref.placeholder +
                           "': references its own output");
            break;
          }
          if (!position.empty()) {
            auto consumer = position.find(node.node_name);
            auto producer = position.find(ref.node_name);
            if (consumer != position.end() && producer != position.end() &&
                producer->second >= consumer->second) {
              report.add(CheckKind::VariableSources,
                         "node '" + node.node_name + "' placeholder '" + ref.placeholder +
                             "': source node '" + ref.node_name +
                             "' does not precede it");
            }
          }
          break;
        }
        case VariableRef::Kind::CrossBlockOutput:
          // Resolvable only once the producing layer's variant is known;
          // checked at execution time. Only the shape is checked here.
          if (ref.layer_index < 0) {
            report.add(CheckKind::VariableSources,
                       "node '" + node.node_name + "' placeholder '" + ref.placeholder +
                           "': negative layer index");
          }
          break;
      }
    }
  }
}

void check_format(const BlockVariant& block, ValidationReport& report) {
  if (block.nodes.empty()) {
    report.add(CheckKind::Format, "block has no nodes");
    return;
  }
  if (block.block_id <= 0) {
    report.add(CheckKind::Format, "block_id must be positive");
  }

  const std::string suffix = std::to_string(block.block_id);
  if (block.name.size() <= suffix.size() ||
      block.name.substr(block.name.size() - suffix.size()) != suffix ||
      std::isdigit(static_cast<unsigned char>(
          block.name[block.name.size() - suffix.size() - 1]))) {
    report.add(CheckKind::Format, "name '" + block.name +
                                      "' does not end in block_id " + suffix);
  }

  std::unordered_set<std::string> seen;
  for (const auto& node : block.nodes) {
    if (!seen.insert(node.node_name).second) {
      report.add(CheckKind::Format, "duplicate node name '" + node.node_name + "'");
    }
  }

  const auto names = node_name_set(block);
  if (!names.count(block.entry_node)) {
    report.add(CheckKind::Format, "entry_node '" + block.entry_node + "' not in nodes");
  }
  if (!names.count(block.end_node)) {
    report.add(CheckKind::Format, "end_node '" + block.end_node + "' not in nodes");
  }

  // Every template placeholder must be supplied by exactly one input variable.
  for (const auto& node : block.nodes) {
    std::unordered_map<std::string, int> supplied;
    for (const auto& ref : node.input_variables) ++supplied[ref.placeholder];
    for (const auto& [placeholder, count] : supplied) {
      if (count > 1) {
        report.add(CheckKind::Format, "node '" + node.node_name + "': placeholder '" +
                                          placeholder + "' bound " +
                                          std::to_string(count) + " times");
      }
    }
    for (const auto& placeholder : template_placeholders(node.prompt_template)) {
      if (!supplied.count(placeholder)) {
        report.add(CheckKind::Format, "node '" + node.node_name + "': placeholder '" +
                                          placeholder + "' has no input variable");
      }
    }
  }
}

void check_edges(const BlockVariant& block, ValidationReport& report) {
  const auto names = node_name_set(block);
  std::unordered_set<std::string> has_outgoing;
  for (const auto& [from, to] : block.edges) {
    if (!names.count(from)) {
      report.add(CheckKind::Edges, "edge references missing node '" + from + "'");
    }
    if (!names.count(to)) {
      report.add(CheckKind::Edges, "edge references missing node '" + to + "'");
    }
    has_outgoing.insert(from);
  }
  for (const auto& node : block.nodes) {
    if (node.node_name == block.end_node) continue;
    if (!has_outgoing.count(node.node_name)) {
      report.add(CheckKind::Edges,
                 "node '" + node.node_name + "' has no outgoing edge");
    }
  }
}

}  // namespace

bool structurally_equal(const BlockVariant& a, const BlockVariant& b) {
  if (a.nodes.size() != b.nodes.size() || a.edges.size() != b.edges.size()) return false;

  auto node_key = [](const NodeSpec& node) {
    return std::tuple(node.node_name, node.agent_role,
                      normalize_whitespace(node.prompt_template));
  };
  std::vector<std::tuple<std::string, std::string, std::string>> lhs_nodes, rhs_nodes;
  for (const auto& node : a.nodes) lhs_nodes.push_back(node_key(node));
  for (const auto& node : b.nodes) rhs_nodes.push_back(node_key(node));
  std::sort(lhs_nodes.begin(), lhs_nodes.end());
  std::sort(rhs_nodes.begin(), rhs_nodes.end());
  if (lhs_nodes != rhs_nodes) return false;

  auto lhs_edges = a.edges;
  auto rhs_edges = b.edges;
  std::sort(lhs_edges.begin(), lhs_edges.end());
  std::sort(rhs_edges.begin(), rhs_edges.end());
  return lhs_edges == rhs_edges;
}

ValidationReport validate_block(const BlockVariant& block,
                                const std::vector<BlockVariant>& pool) {
  ValidationReport report;

  check_variable_sources(block, report);
  check_format(block, report);
  check_edges(block, report);

  if (!try_topological_order(block)) {
    report.add(CheckKind::Acyclicity, "graph contains a cycle");
  }

  for (const auto& member : pool) {
    if (member.block_id == block.block_id) continue;  // re-validating a member
    if (structurally_equal(member, block)) {
      report.add(CheckKind::Uniqueness,
                 "structurally identical to pool member '" + member.name + "'");
    }
  }

  return report;
}

std::vector<std::string> topological_order(const BlockVariant& block) {
  auto order = try_topological_order(block);
  if (!order) {
    throw Error(ErrorCode::CycleDetected, "block '" + block.name + "' is cyclic");
  }
  return *order;
}

std::vector<std::string> template_placeholders(const std::string& template_text) {
  std::vector<std::string> found;
  std::unordered_set<std::string> seen;
  for (size_t i = 0; i < template_text.size(); ++i) {
    if (template_text[i] != '{') continue;
    size_t j = i + 1;
    if (j < template_text.size() &&
        (std::isalpha(static_cast<unsigned char>(template_text[j])) ||
         template_text[j] == '_')) {
      size_t k = j + 1;
      while (k < template_text.size() &&
             (std::isalnum(static_cast<unsigned char>(template_text[k])) ||
              template_text[k] == '_')) {
        ++k;
      }
      if (k < template_text.size() && template_text[k] == '}') {
        std::string name = template_text.substr(j, k - j);
        if (seen.insert(name).second) found.push_back(name);
        i = k;
      }
    }
  }
  return found;
}

std::string render_prompt(const std::string& template_text,
                          const std::map<std::string, std::string>& bindings,
                          std::vector<std::string>* unused_warnings) {
  std::string out;
  out.reserve(template_text.size());
  std::unordered_set<std::string> used;

  for (size_t i = 0; i < template_text.size(); ++i) {
    char c = template_text[i];
    if (c != '{') {
      out.push_back(c);
      continue;
    }
    size_t j = i + 1;
    bool is_placeholder = false;
    if (j < template_text.size() &&
        (std::isalpha(static_cast<unsigned char>(template_text[j])) ||
         template_text[j] == '_')) {
      size_t k = j + 1;
      while (k < template_text.size() &&
             (std::isalnum(static_cast<unsigned char>(template_text[k])) ||
              template_text[k] == '_')) {
        ++k;
      }
      if (k < template_text.size() && template_text[k] == '}') {
        std::string name = template_text.substr(j, k - j);
        auto it = bindings.find(name);
        if (it == bindings.end()) {
          throw Error(ErrorCode::MissingBinding, name);
        }
        out.append(it->second);  // inserted text is never re-scanned
        used.insert(name);
        i = k;
        is_placeholder = true;
      }
    }
    if (!is_placeholder) out.push_back(c);
  }

  if (unused_warnings) {
    for (const auto& [name, value] : bindings) {
      (void)value;
      if (!used.count(name)) {
        unused_warnings->push_back("unused binding: " + name);
      }
    }
  }
  return out;
}

// --- JSON ---

namespace {

ordered_json variable_ref_to_json(const VariableRef& ref) {
  ordered_json out;
  out["placeholder"] = ref.placeholder;
  switch (ref.kind) {
    case VariableRef::Kind::State:
      out["state"] = ref.state_key;
      break;
    case VariableRef::Kind::NodeOutput:
      out["node"] = ref.node_name;
      break;
    case VariableRef::Kind::CrossBlockOutput:
      out["layer"] = ref.layer_index;
      out["output"] = ref.output_key;
      break;
  }
  return out;
}

VariableRef variable_ref_from_json(const ordered_json& in) {
  if (!in.is_object() || !in.contains("placeholder")) {
    throw Error(ErrorCode::ParseError, "input variable must carry a placeholder");
  }
  std::string placeholder = in.at("placeholder").get<std::string>();
  if (in.contains("state")) {
    return VariableRef::state(placeholder, in.at("state").get<std::string>());
  }
  if (in.contains("node")) {
    return VariableRef::node_output(placeholder, in.at("node").get<std::string>());
  }
  if (in.contains("layer")) {
    std::string key = in.contains("output") ? in.at("output").get<std::string>()
                                            : std::string(kEndOutputKey);
    return VariableRef::cross_block(placeholder, in.at("layer").get<int>(), key);
  }
  throw Error(ErrorCode::ParseError,
              "input variable '" + placeholder + "' names no source (state/node/layer)");
}

ordered_json node_to_json(const NodeSpec& node) {
  ordered_json out;
  out["node_name"] = node.node_name;
  out["agent_role"] = node.agent_role;
  out["prompt_template"] = node.prompt_template;
  out["input_variables"] = ordered_json::array();
  for (const auto& ref : node.input_variables) {
    out["input_variables"].push_back(variable_ref_to_json(ref));
  }
  out["output_format"] = node.output_format;
  out["constraints"] = node.constraints;
  if (node.temperature) out["temperature"] = *node.temperature;
  return out;
}

NodeSpec node_from_json(const ordered_json& in) {
  NodeSpec node;
  node.node_name = in.at("node_name").get<std::string>();
  node.agent_role = in.value("agent_role", std::string());
  node.prompt_template = in.value("prompt_template", std::string());
  if (in.contains("input_variables")) {
    for (const auto& entry : in.at("input_variables")) {
      node.input_variables.push_back(variable_ref_from_json(entry));
    }
  }
  node.output_format = in.value("output_format", std::string());
  node.constraints = in.value("constraints", std::string());
  if (in.contains("temperature")) node.temperature = in.at("temperature").get<double>();
  return node;
}

ordered_json block_to_ordered_json(const BlockVariant& block) {
  ordered_json out;
  out["block_id"] = block.block_id;
  out["name"] = block.name;
  out["entry_node"] = block.entry_node;
  out["end_node"] = block.end_node;
  out["nodes"] = ordered_json::array();
  for (const auto& node : block.nodes) out["nodes"].push_back(node_to_json(node));
  out["edges"] = ordered_json::array();
  for (const auto& [from, to] : block.edges) {
    out["edges"].push_back(ordered_json::array({from, to}));
  }
  out["structure_description"] = block.structure_description;
  out["structure_description_details"] = block.structure_description_details;
  if (block.lineage) out["lineage"] = *block.lineage;
  return out;
}

BlockVariant block_from_ordered_json(const ordered_json& in) {
  BlockVariant block;
  block.block_id = in.at("block_id").get<int>();
  block.name = in.at("name").get<std::string>();
  block.entry_node = in.at("entry_node").get<std::string>();
  block.end_node = in.at("end_node").get<std::string>();
  for (const auto& node : in.at("nodes")) block.nodes.push_back(node_from_json(node));
  if (in.contains("edges")) {
    for (const auto& edge : in.at("edges")) {
      if (!edge.is_array() || edge.size() != 2) {
        throw Error(ErrorCode::ParseError, "edges must be two-element arrays");
      }
      block.edges.emplace_back(edge[0].get<std::string>(), edge[1].get<std::string>());
    }
  }
  block.structure_description = in.value("structure_description", std::string());
  if (in.contains("structure_description_details")) {
    for (const auto& detail : in.at("structure_description_details")) {
      block.structure_description_details.push_back(detail.get<std::string>());
    }
  }
  if (in.contains("lineage") && !in.at("lineage").is_null()) {
    block.lineage = in.at("lineage").get<int>();
  }
  return block;
}

ordered_json layer_to_json(const LayerSlot& layer) {
  ordered_json out;
  out["layer_index"] = layer.layer_index;
  if (layer.active_hint) out["active_hint"] = *layer.active_hint;
  if (layer.pending_feedback) out["pending_feedback"] = *layer.pending_feedback;
  out["pool"] = ordered_json::array();
  for (const auto& block : layer.pool) out["pool"].push_back(block_to_ordered_json(block));
  return out;
}

LayerSlot layer_from_json(const ordered_json& in) {
  LayerSlot layer;
  layer.layer_index = in.at("layer_index").get<int>();
  if (in.contains("active_hint") && !in.at("active_hint").is_null()) {
    layer.active_hint = in.at("active_hint").get<int>();
  }
  if (in.contains("pending_feedback") && !in.at("pending_feedback").is_null()) {
    layer.pending_feedback = in.at("pending_feedback").get<std::string>();
  }
  for (const auto& block : in.at("pool")) {
    layer.pool.push_back(block_from_ordered_json(block));
  }
  return layer;
}

ordered_json parse_json(const std::string& text, const char* what) {
  ordered_json parsed = ordered_json::parse(text, nullptr, false);
  if (parsed.is_discarded()) {
    throw Error(ErrorCode::ParseError, std::string(what) + ": malformed JSON");
  }
  return parsed;
}

}  // namespace

std::string network_to_json(const Network& network) {
  ordered_json out;
  out["task_profile"] = network.task_profile;
  out["revision"] = network.revision;
  out["layers"] = ordered_json::array();
  for (const auto& layer : network.layers) out["layers"].push_back(layer_to_json(layer));
  return out.dump(2) + "\n";
}

Network network_from_json(const std::string& json_text) {
  ordered_json in = parse_json(json_text, "network");
  Network network;
  try {
    network.task_profile = in.value("task_profile", std::string());
    network.revision = in.value("revision", std::uint64_t{1});
    if (!in.contains("layers") || !in.at("layers").is_array() || in.at("layers").empty()) {
      throw Error(ErrorCode::ParseError, "network needs at least one layer");
    }
    for (const auto& layer : in.at("layers")) {
      network.layers.push_back(layer_from_json(layer));
    }
  } catch (const ordered_json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("network: ") + e.what());
  }
  for (const auto& layer : network.layers) {
    if (layer.pool.empty()) {
      throw Error(ErrorCode::ParseError,
                  "layer " + std::to_string(layer.layer_index) + " has an empty pool");
    }
    std::set<int> ids;
    for (const auto& block : layer.pool) {
      if (!ids.insert(block.block_id).second) {
        throw Error(ErrorCode::ParseError,
                    "layer " + std::to_string(layer.layer_index) +
                        ": duplicate block_id " + std::to_string(block.block_id));
      }
    }
    if (layer.active_hint && !layer.find_block(*layer.active_hint)) {
      throw Error(ErrorCode::ParseError,
                  "layer " + std::to_string(layer.layer_index) +
                      ": active_hint names no pool member");
    }
  }
  return network;
}

Network network_from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return network_from_json(buffer.str());
}

std::string block_to_json(const BlockVariant& block) {
  return block_to_ordered_json(block).dump(2) + "\n";
}

BlockVariant block_from_json(const std::string& json_text) {
  ordered_json in = parse_json(json_text, "block");
  try {
    return block_from_ordered_json(in);
  } catch (const ordered_json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("block: ") + e.what());
  }
}

}  // namespace ann::graph
