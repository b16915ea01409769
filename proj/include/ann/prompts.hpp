// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

namespace ann::prompts {

// Prompt templates for every model-facing protocol in the engine. The slot
// names, option sentences, section labels, and tagged output formats are
// load-bearing: parsers in evaluation and backward passes match on them.

/// Judge template for tasks with a ground truth.
/// Slots: {problem}, {final_answer}, {solution}.
const std::string& verify_with_ground_truth();

/// Rubric template for open-ended outputs.
/// Slots: {task_prompt}, {output_from_last_layer}.
const std::string& verify_open_ended();

/// Global workflow critique over one failed trajectory.
/// Slots: {initial_solution}, {example_global_loss_format}.
const std::string& global_gradient();

/// Block-level optimization request.
/// Slots: {block_name}, {global_loss_feedback}, {blocks_log},
/// {canonical_solution}, {task_prompt}, {available_agents}, {new_block_id},
/// {layerwise_loss_format}, {emphasis_directive}, {edit_scope_directive}.
const std::string& layerwise_gradient();

/// Momentum merge of current feedback with the previous adjustment direction.
/// Slots: {block_name}, {current_block}, {current_task_results},
/// {current_gradient}, {velocity}, {block_input}, {block_output}, {nodes_info}.
const std::string& momentum_merge();

/// Per-layer variant selection.
/// Slots: {task_prompt}, {blocks_structure_descriptions}.
const std::string& block_selection();

/// JSON skeleton the global critique must follow (fills
/// {example_global_loss_format}).
const std::string& global_loss_format();

/// JSON skeleton a block optimization reply must follow (fills
/// {layerwise_loss_format}).
const std::string& layerwise_loss_format();

/// Feedback-weighting directive derived from the blend factor: at or above
/// 2/3 global feedback dominates, below 1/3 block-local evidence dominates,
/// in between they are balanced.
std::string emphasis_directive(double beta);

/// Edit-scope directive derived from the step size: below 1/3 prompt edits
/// only, from 1/3 prompts plus edge rewiring, at or above 2/3 full scope
/// including up to `max_node_additions` new nodes.
std::string edit_scope_directive(double eta, int max_node_additions);

}  // namespace ann::prompts
