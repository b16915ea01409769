// SPDX-License-Identifier: Apache-2.0
#include "ann/prompts.hpp"

namespace ann::prompts {

const std::string& verify_with_ground_truth() {
  static const std::string text = R"(You are a helpful AI assistant. You will use your math skills to verify the answer.

You are given:
- A problem: {problem}
- A reply from a model: {final_answer}
- A ground truth answer: {solution}

Please do the following:
- Extract the answer in the reply using the format: "The answer is <answer extracted>"
- Compare the extracted answer with the ground truth.
- Based on your analysis, choose and only output one of the following options:
  1. "The answer is correct."
  2. "The answer is approximated but should be correct."
  3. "The answer is incorrect. Correct Answer: <ground truth answer> </ground truth answer> | Answer extracted: <answer extracted> </answer extracted>."
  4. "The reply doesn't contain an answer."
)";
  return text;
}

const std::string& verify_open_ended() {
  static const std::string text = R"(Evaluate the following creative writing piece based on the provided task requirements.

Inputs:
- Task Description: {task_prompt}
- Creative Writing Output: {output_from_last_layer}

Evaluation Criteria:
- Logical coherence: Is the text logically organized?
- Emotional engagement: Does the text evoke the desired emotions?
- Adherence to task requirements: Does the text align with the original task prompt?
- Creativity: Is the text original and imaginative?

Output Format:
- Coherence: [Score out of 10, with a brief explanation]
- Engagement: [Score out of 10, with a brief explanation]
- Adherence: [Score out of 10, with a brief explanation]
- Creativity: [Score out of 10, with a brief explanation]
- Suggestions for Improvement: [Text]
- Overall Score: [Score out of 10]
)";
  return text;
}

const std::string& global_gradient() {
  static const std::string text = R"(Task Description:
You are an advanced global workflow analysis assistant tasked with diagnosing inefficiencies and proposing optimizations for a multi-step process.
Your goal is to analyze the workflow trajectory and determine which aspects need improvement to address task failures and enhance overall performance.

Instructions:
You will evaluate the provided consolidated information from a workflow task.
Identify which sub-task outputs or prompts likely caused the failure and provide specific suggestions for each sub-task.

Your output must strictly follow this format:
<output_format>{example_global_loss_format}</output_format>

Important Notice:
- All analyses and suggestions should be based on a general level.
- Avoid overly targeted feedback for this specific task instance.
- All required information is provided via: {initial_solution}

Global Optimization Steps:

1. Final Result Evaluation:
   Analyze the final result <final result> to determine if the task failed.

2. Solution Comparison:
   Compare <canonical solution> and <generated solution>:
   - Is the logic in <generated solution> aligned with <canonical solution>?
   - Where is the gap between the analysis and the standard answer?
   - Identify specific issues in <generated solution> that contributed to the failure.
   - Document these findings in the 'global_analysis' section of the <output_format>.

3. Block Input and Output Analysis:
   Based on the <task description> and <workflow trajectory>:
   - Do not compare the block outputs with the <canonical solution>.
   - Examine each block_input and block_output.
   - Identify which block(s) caused the task to fail.
   - Highlight any inefficiencies or redundancies.
   - Write optimization suggestions into the 'structure_suggestion' section of each relevant block.
   - Review each block's block_description and provide edits if necessary, recorded in the 'prompt_suggestions' section.
   - If no edits are needed, do not add any suggestions.

4. Node-Level Analysis Within Blocks:
   For each problematic block:
   - Analyze the internal node_input and node_output.
   - Evaluate the team collaboration structure.
   - Propose improvements to intra-block agent collaboration, if necessary.
   - Document your suggestions in the 'structure_suggestion' section of the corresponding block.
)";
  return text;
}

const std::string& layerwise_gradient() {
  static const std::string text = R"(You are given a block within a workflow.
Your task is to suggest optimizations for this block, focusing on both prompt improvements and structural changes, while ensuring consistency and efficiency.

Block Information:
- Block Name: {block_name}
- Global Loss Feedback: {global_loss_feedback}
  (This is global feedback for the entire workflow. Use as reference, but base suggestions on block-level reasoning. {emphasis_directive})
- Blocks Log: {blocks_log}
  (Includes architecture, node inputs/outputs, block/node descriptions.)
- Canonical Solution: {canonical_solution}
- Task Description: {task_prompt}

Notice - Evaluation Criteria:

1. Evaluate Each Node
   - Check input_variables for validity and consistency.
   - Valid sources include:
     - State variables: "task_data", "task_prompt", "task_id"
     - Prior node outputs within this block
     - Named outputs of blocks in earlier layers
   - For prompt modifications:
     - Include an updated prompt_template with clear instructions
     - Explicitly list all input_variables and their sources

2. Propose Structural Changes
   - {edit_scope_directive}
   - Add/remove nodes (max 3 additions)
   - For added nodes, specify:
     - node_name, agent, output format, prompt_template
     - variable_sources, constraints
   - Define from/to edges for new nodes
   - Update connected nodes' input_variables if needed
   - Set the new entry_node and end_node
   - Ensure all nodes (except end_node) have valid outgoing edges
   - Include all_edges_now and all_nodes_now

3. Impact on Other Nodes
   - Maintain logical consistency with the entire workflow

4. Use Available Agents
   - Refer to {available_agents} for potential agents
   - Check each agent's constraints for fit
   - Modify agents as needed (update prompt_template, input_variables, or define new agents)

5. Dynamic Block ID and Naming
   - Use {new_block_id} to assign a unique block_id
   - Format name as {block_name}X, where X = {new_block_id}

6. Block Structure Description
   - Include:
     - block_structure_description - high-level purpose
     - block_structure_description_details - list of:
       1. Nodes and connections
       2. Node roles and logic
       3. Input/output flow
   - Ensure clarity, accuracy, and alignment with structure

7. Provided Canonical Solution and Test Cases
   - Don't over-optimize: block may not be the cause of failure
   - Avoid overfitting: feedback should remain generalized
   - Use <canonical solution> and <test cases> as reference only

8. Output Format
   - All feedback must be returned in this JSON format: {layerwise_loss_format}
   - Do not use arrows (->) to represent edges!
)";
  return text;
}

const std::string& momentum_merge() {
  static const std::string text = R"(Task Description:
You are an advanced strategic advisor focused on enhancing team performance. Your role is to analyze recent feedback in combination with historical adjustments to guide team improvement for a specific workflow block.

Provided Information:
- Team Name: <team name> {block_name} </team name>
- Current Team Structure: <current team> {current_block} </current team>
- Final Result of Task Execution: <final result> {current_task_results} </final result>
- Current Gradient Feedback: <current feedback> {current_gradient} </current feedback>
- Previous Adjustment Direction: <previous adjustment direction> {velocity} </previous adjustment direction>
- Input and Output for Block and Nodes:
  - <team input> {block_input} </team input>
  - <team output> {block_output} </team output>
  - <input and output of all nodes> {nodes_info} </input and output of all nodes>

Instructions: Follow the two-step strategy below.

1. Overlap Handling:
   - If <current feedback> overlaps with <previous adjustment direction>, focus on these overlapping issues.
   - Since the current version <current team> was formed via previous adjustments, but <final result> still failed, analyze why earlier suggestions did not work.
   - Carefully review block input, block output, and nodes_info to pinpoint reasons for failure.
   - Revise the <current feedback> so it addresses overlapping issues in a more effective way.

2. New Issues Maintenance:
   - If <current feedback> introduces new problems not found in <previous adjustment direction>, retain those.
   - Slightly refine and consolidate all suggestions to form an updated version of feedback.

Important Notes:
- This block may not be the root cause of task failure. Avoid over-optimization.
- Our optimization is dataset-level, not task-specific. Do not overfit feedback to this task instance.

Output Format:
Return your suggestions using the same structure as <current feedback>, wrapped as:
<adjusted feedback> [Your updated suggestions here] </adjusted feedback>
)";
  return text;
}

const std::string& block_selection() {
  static const std::string text = R"(Task Description:
You are a performance evaluator tasked with selecting the most suitable block for solving the task below. Each candidate block is one team of agents; exactly one must execute this layer.

Task Details:
- Task Description: <task description> {task_prompt} </task description>

Available Blocks:
Below is a list of available blocks, including their structural roles and descriptions:
<list of all block's structure description> {blocks_structure_descriptions} </list of all block's structure description>

Instructions:
1. Evaluate the <task description> carefully, identifying key difficulty points and requirements.
2. Compare block roles and structures from <list of all block's structure description> to determine which best fits the task.
3. Select the most appropriate block based on the task complexity.

Output Format:
- Output your selection using the exact format below, where X is the block_id of your chosen block:
  <selected_agg_func> X </selected_agg_func>
)";
  return text;
}

const std::string& global_loss_format() {
  static const std::string text = R"({
  "global_analysis": "<why the final result failed, at a general level>",
  "blocks": [
    {
      "layer_index": 0,
      "block_name": "<name of the block at that layer>",
      "structure_suggestion": "<structural change for this block, omit if none>",
      "prompt_suggestions": [
        {"node_name": "<node>", "suggestion": "<prompt edit for that node>"}
      ]
    }
  ]
})";
  return text;
}

const std::string& layerwise_loss_format() {
  static const std::string text = R"({
  "block_id": "<use the provided new block id>",
  "name": "<base block name followed by the new block id>",
  "nodes": [
    {
      "node_name": "<unique name>",
      "agent": "<agent role>",
      "prompt_template": "<instructions with {placeholder} slots>",
      "input_variables": [
        {"placeholder": "<slot>", "state": "<task_data|task_prompt|task_id>"},
        {"placeholder": "<slot>", "node": "<earlier node in this block>"},
        {"placeholder": "<slot>", "layer": 0, "output": "<node name or __end__>"}
      ],
      "output_format": "<expected reply shape>",
      "constraints": "<agent constraints>"
    }
  ],
  "edges": [["<from node>", "<to node>"]],
  "entry_node": "<name>",
  "end_node": "<name>",
  "all_nodes_now": ["<every node name after the change>"],
  "all_edges_now": [["<from>", "<to>"]],
  "block_structure_description": "<high-level purpose>",
  "block_structure_description_details": ["<nodes and connections>", "<node roles and logic>", "<input/output flow>"],
  "critique": "<what was wrong and what this change fixes>"
})";
  return text;
}

std::string emphasis_directive(double beta) {
  if (beta >= 2.0 / 3.0) {
    return "When weighing evidence, prioritize the global feedback.";
  }
  if (beta >= 1.0 / 3.0) {
    return "When weighing evidence, balance global feedback with block-local evidence.";
  }
  return "When weighing evidence, prioritize block-local evidence.";
}

std::string edit_scope_directive(double eta, int max_node_additions) {
  if (eta >= 2.0 / 3.0) {
    return "Edit scope for this update: full scope - prompt templates, edge rewiring, "
           "and up to " + std::to_string(max_node_additions) +
           " new nodes (never more).";
  }
  if (eta >= 1.0 / 3.0) {
    return "Edit scope for this update: prompt templates and edge rewiring only; "
           "do not add or remove nodes.";
  }
  return "Edit scope for this update: prompt-template edits only; "
         "do not change nodes or edges.";
}

}  // namespace ann::prompts
