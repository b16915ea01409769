// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ann/common.hpp"

namespace ann::graph {

/// Where a prompt placeholder gets its value from at execution time.
///
/// - State: one of the per-task state variables ("task_data", "task_prompt",
///   "task_id").
/// - NodeOutput: the reply of an earlier node inside the same block.
/// - CrossBlockOutput: output produced by a previous layer; `output_key`
///   names a node in that layer's executed block, or kEndOutputKey for the
///   layer's block output. Resolvable only at execution time because the
///   producing layer's variant is chosen by routing.
struct VariableRef {
  enum class Kind { State, NodeOutput, CrossBlockOutput };

  std::string placeholder;
  Kind kind = Kind::State;
  std::string state_key;     // Kind::State
  std::string node_name;     // Kind::NodeOutput
  int layer_index = -1;      // Kind::CrossBlockOutput
  std::string output_key;    // Kind::CrossBlockOutput

  static VariableRef state(std::string placeholder, std::string key);
  static VariableRef node_output(std::string placeholder, std::string node);
  static VariableRef cross_block(std::string placeholder, int layer, std::string key);

  bool operator==(const VariableRef&) const = default;
};

inline constexpr const char* kEndOutputKey = "__end__";

/// State variable keys a VariableRef::State may name.
const std::vector<std::string>& allowed_state_keys();

/// One agent position inside a block: its role, prompt template with
/// `{placeholder}` slots, and where each slot's value comes from.
struct NodeSpec {
  std::string node_name;
  std::string agent_role;
  std::string prompt_template;
  std::vector<VariableRef> input_variables;
  std::string output_format;
  std::string constraints;
  std::optional<double> temperature;  // per-node override; engine default otherwise

  bool operator==(const NodeSpec&) const = default;
};

/// One candidate aggregation function for a layer: a DAG of agent nodes with
/// a single entry and a single end node. Immutable once constructed; updates
/// create new variants instead of mutating accepted ones.
struct BlockVariant {
  int block_id = 0;                  // positive, unique within the layer pool
  std::string name;                  // "<base_name><block_id>"
  std::vector<NodeSpec> nodes;
  std::vector<std::pair<std::string, std::string>> edges;  // (from, to)
  std::string entry_node;
  std::string end_node;
  std::string structure_description;
  std::vector<std::string> structure_description_details;
  std::optional<int> lineage;        // parent block_id, when derived by an update

  const NodeSpec* find_node(const std::string& node_name) const;

  /// Base name with the trailing decimal id stripped (e.g. "SolveBlock2" -> "SolveBlock").
  std::string base_name() const;
};

/// A layer slot: the pool of candidate variants routing chooses from.
struct LayerSlot {
  int layer_index = 0;
  std::vector<BlockVariant> pool;
  std::optional<int> active_hint;              // most recently validated variant
  std::optional<std::string> pending_feedback; // critique context attached by a global update

  const BlockVariant* find_block(int block_id) const;
  int max_block_id() const;
};

/// The global workflow: ordered layers, each with its candidate pool.
struct Network {
  std::vector<LayerSlot> layers;
  std::string task_profile;
  std::uint64_t revision = 1;
};

enum class CheckKind { VariableSources, Format, Edges, Acyclicity, Uniqueness };

const char* check_kind_name(CheckKind kind);

struct ValidationFailure {
  CheckKind check;
  std::string detail;
};

/// Outcome of validate_block. `passed` iff `failures` is empty.
struct ValidationReport {
  bool passed = true;
  std::vector<ValidationFailure> failures;

  void add(CheckKind check, std::string detail);
};

/// Runs every structural check against `block` — variable sources, prompt and
/// naming format, outgoing-edge coverage, acyclicity, and structural
/// uniqueness against `pool` — and reports every failure found, not just the
/// first. Pure: identical inputs yield identical reports.
ValidationReport validate_block(const BlockVariant& block,
                                const std::vector<BlockVariant>& pool);

/// True iff the two variants are structurally equal: same node names and
/// agent roles, same edge set, and whitespace-normalized prompt templates.
/// Descriptions and ids are excluded.
bool structurally_equal(const BlockVariant& a, const BlockVariant& b);

/// Deterministic topological order: entry_node first among the initial
/// zero-in-degree nodes, remaining ties broken lexicographically by name.
/// Throws Error(CycleDetected) when the block is cyclic.
std::vector<std::string> topological_order(const BlockVariant& block);

/// Substitutes `{name}` slots in `template_text` with `bindings`. Single
/// pass: inserted values are never re-expanded. A `{...}` span that is not a
/// well-formed placeholder name is left as literal text. Unbound placeholders
/// throw Error(MissingBinding); unused bindings are collected into
/// `unused_warnings` when the caller provides it.
std::string render_prompt(const std::string& template_text,
                          const std::map<std::string, std::string>& bindings,
                          std::vector<std::string>* unused_warnings = nullptr);

/// Names of the placeholders appearing in a template, in first-occurrence order.
std::vector<std::string> template_placeholders(const std::string& template_text);

// --- canonical JSON (de)serialization ---
// parse(serialize(x)) is the identity, and serialize(parse(text)) is
// byte-stable after one pass.

std::string network_to_json(const Network& network);
Network network_from_json(const std::string& json_text);
Network network_from_file(const std::string& path);

std::string block_to_json(const BlockVariant& block);
BlockVariant block_from_json(const std::string& json_text);

}  // namespace ann::graph
