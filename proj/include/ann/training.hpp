// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ann/backward.hpp"
#include "ann/eval.hpp"
#include "ann/forward.hpp"
#include "ann/graph.hpp"
#include "ann/runtime.hpp"

namespace ann::train {

/// One line of history.jsonl. accepted_updates always equals the epoch's
/// total pool growth; usage totals are cumulative for the whole run.
struct EpochMetrics {
  int epoch = 0;
  double train_metric = 0.0;
  double validation_metric = 0.0;
  std::vector<int> pool_sizes;  // per layer, in layer order, after the epoch
  int accepted_updates = 0;
  int rejected_updates = 0;
  int routing_fallbacks = 0;
  llm::UsageRecord usage;
  std::uint64_t revision = 0;
};

/// Single-line JSON, newline-terminated, stable field order.
std::string epoch_metrics_to_json(const EpochMetrics& metrics);
EpochMetrics epoch_metrics_from_json(const std::string& json_line);

struct RunStats {
  int backward_invocations = 0;    // failed tasks that entered the backward pass
  int momentum_applications = 0;   // merges against a stored velocity
  int skipped_tasks = 0;           // tasks whose forward or gradient step errored
  std::vector<std::string> warnings;
};

struct TrainResult {
  graph::Network network;
  std::vector<EpochMetrics> history;
  RunStats stats;
};

/// Evaluates the network on a dataset: forward plus judging per task, no
/// structural changes. A task whose forward pass throws is scored as failed.
/// Tasks run in waves of `parallel_tasks`; outputs keep dataset order.
double evaluate(const Engine& engine, const graph::Network& network,
                const std::vector<exec::TaskInstance>& tasks, int parallel_tasks = 1,
                std::vector<eval::EvalOutcome>* outcomes_out = nullptr,
                std::vector<exec::Trajectory>* trajectories_out = nullptr);

/// The full loop, driven by engine.config.run and engine.config.optimizer:
/// per epoch, shuffle the training set with seed+epoch, run forward +
/// evaluation per task, and on each failure (with toggles.backward) run the
/// textual backward pass online: global gradient, then per flagged layer in
/// reverse order a local gradient, optional momentum merge, and a validated
/// pool append. Velocities reset at epoch boundaries. When `run_dir` is
/// non-empty, persists epoch-{k}.network.json checkpoints, history.jsonl,
/// per-step gradient artifacts, and every trajectory.
TrainResult train(const Engine& engine, const graph::Network& network,
                  const std::vector<exec::TaskInstance>& train_tasks,
                  const std::vector<exec::TaskInstance>& validation_tasks,
                  const std::string& run_dir = "");

}  // namespace ann::train
