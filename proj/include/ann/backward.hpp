// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ann/eval.hpp"
#include "ann/forward.hpp"
#include "ann/graph.hpp"
#include "ann/runtime.hpp"

namespace ann::opt {

struct PromptSuggestion {
  std::string node_name;
  std::string suggestion;
};

struct BlockFeedback {
  int layer_index = -1;
  std::string block_name;
  std::optional<std::string> structure_suggestion;
  std::vector<PromptSuggestion> prompt_suggestions;
};

/// Parsed global textual gradient: one overall diagnosis plus per-block
/// suggestions. An empty per_block list is legal and makes the global
/// update a no-op.
struct GlobalLossReport {
  std::string global_analysis;
  std::vector<BlockFeedback> per_block;
};

std::string report_to_json(const GlobalLossReport& report);
GlobalLossReport report_from_json(const std::string& json_text);

/// Block-level textual gradient: a critique and, when the optimizer proposed
/// one, a full replacement structure.
struct LocalGradient {
  int layer_index = -1;
  int target_block_id = -1;
  std::string critique;
  std::optional<graph::BlockVariant> proposed;
};

/// Previous adjustment direction per (layer, block); replaced wholesale on
/// each momentum application and cleared between epochs.
class VelocityStore {
 public:
  std::optional<std::string> get(int layer_index, int block_id) const;
  void put(int layer_index, int block_id, std::string velocity, int step);
  void clear();
  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    std::string velocity;
    int updated_at_step = 0;
  };
  std::map<std::pair<int, int>, Entry> entries_;
};

/// Renders the per-layer execution log shown to the critique models.
std::string render_trajectory_log(const graph::Network& network,
                                  const exec::Trajectory& trajectory);

/// Renders one block's architecture and node I/O for the block optimizer.
std::string render_block_log(const graph::BlockVariant& block,
                             const exec::LayerRecord* record);

/// Global gradient: consolidates the failed trajectory (final result,
/// canonical vs generated solution, per-block and per-node I/O), queries the
/// critique model, and parses the structured report.
/// Throws Error(GradientUnparseable) on a reply without global_analysis or
/// with malformed block entries.
GlobalLossReport compute_global_gradient(
    const Engine& engine, const graph::Network& network,
    const exec::Trajectory& trajectory, const eval::EvalOutcome& outcome,
    const std::optional<std::string>& canonical_solution);

struct GlobalUpdateResult {
  graph::Network network;
  std::set<int> flagged_layers;
  std::vector<std::string> warnings;  // skipped entries, unknown layers
};

/// Attaches each block's suggestions to its layer as pending critique
/// context and flags those layers for local optimization. Never mutates
/// block structures; bumps the network revision iff any layer was flagged.
/// Entries naming unknown layers are skipped with a warning.
GlobalUpdateResult global_gradient_update(const graph::Network& network,
                                          const GlobalLossReport& report,
                                          const exec::Trajectory& trajectory);

/// Local gradient for one flagged layer. The blend factor becomes an
/// emphasis directive in the rendered prompt; the step size gates the edit
/// scope; global feedback is always included verbatim. Parses the JSON
/// reply into a critique plus optional proposed variant.
/// Throws Error(LayerwiseUnparseable) on malformed replies or arrow-notation
/// edges, Error(EditBudgetExceeded) when the proposal adds more nodes than
/// allowed.
LocalGradient compute_local_gradient(const Engine& engine, int layer_index,
                                     const graph::BlockVariant& block,
                                     const exec::Trajectory& trajectory,
                                     const GlobalLossReport& report, double beta,
                                     int new_block_id,
                                     const std::optional<std::string>& canonical_solution,
                                     const std::vector<std::string>& prior_failures = {});

/// Execution context the momentum prompt needs.
struct MomentumInputs {
  std::string current_block_json;
  std::string task_result;
  std::string block_input;
  std::string block_output;
  std::string nodes_info;
};

MomentumInputs momentum_inputs_from(const graph::BlockVariant& block,
                                    const exec::LayerRecord* record,
                                    const std::string& task_result);

/// Momentum merge. Cold start (no stored velocity) returns the gradient
/// unchanged and seeds the velocity. Otherwise the merge model combines the
/// current feedback with the previous adjustment direction; the tagged
/// adjusted feedback replaces the critique and becomes the new velocity.
/// An untagged reply falls back to the current gradient with a warning.
LocalGradient apply_momentum(const Engine& engine, int layer_index, int block_id,
                             const LocalGradient& current, VelocityStore& velocity_store,
                             double alpha, const MomentumInputs& inputs, int step,
                             std::vector<std::string>* warnings = nullptr);

struct UpdateResult {
  bool accepted = false;
  std::optional<graph::BlockVariant> new_block;
  std::vector<std::string> reasons;  // every failure across attempts
  int attempts_used = 0;
  int optimizer_calls = 0;
};

/// Produces a candidate gradient, re-prompting with the accumulated failure
/// reasons; called at most (max_update_attempts - consumed) times.
using ProposeFn =
    std::function<LocalGradient(const std::vector<std::string>& prior_failures)>;

/// Performance gate for a structurally valid candidate; may describe the
/// failure via `why`. Null PerformanceFn skips the gate (ablation).
using PerformanceFn =
    std::function<bool(const graph::BlockVariant& candidate, std::string* why)>;

/// The validated update loop: up to max_update_attempts candidates run
/// through structural validation then the performance gate. The first full
/// success is canonicalized (block_id = pool max + 1, name = parent base +
/// id, lineage = parent), appended to the pool, and made the active hint.
/// All failures across attempts are enumerated in the result.
UpdateResult local_gradient_update(graph::LayerSlot& layer,
                                   const graph::BlockVariant& parent,
                                   const LocalGradient& gradient,
                                   const OptimizerConfig& config,
                                   const ProposeFn& propose,
                                   const PerformanceFn& performance);

/// Candidate-vs-incumbent comparison on a fixed-seed sample of validation
/// tasks: forward runs with the candidate pinned at its layer, then with the
/// incumbent pinned, comparing dataset metrics with ties accepting the
/// candidate. Any candidate-side failure returns false.
bool validate_performance(const Engine& engine, const graph::Network& network,
                          int layer_index, const graph::BlockVariant& candidate,
                          const graph::BlockVariant& incumbent,
                          const std::vector<exec::TaskInstance>& validation_tasks,
                          int sample_size, std::uint64_t seed,
                          std::string* detail = nullptr);

}  // namespace ann::opt
