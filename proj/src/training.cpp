// SPDX-License-Identifier: Apache-2.0
#include "ann/training.hpp"

#include <algorithm>
#include <exception>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace ann::train {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << content;
}

void append_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::Io, "cannot append to " + path.string());
  out << content;
}

std::string fixed6(double value) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(6);
  out << value;
  return out.str();
}

// A task that never produced a judge verdict still needs an outcome whose
// kind matches the rest of the dataset, or the metric would refuse to mix.
eval::EvalOutcome failed_outcome_for(const exec::TaskInstance& task,
                                     const std::string& why) {
  eval::EvalOutcome outcome;
  outcome.kind = task.ground_truth ? eval::EvalOutcome::Kind::Verdict
                                   : eval::EvalOutcome::Kind::Rubric;
  outcome.passed = false;
  outcome.judge_parse_failed = true;
  outcome.diagnostic = why;
  return outcome;
}

struct TaskResult {
  std::optional<exec::Trajectory> trajectory;
  eval::EvalOutcome outcome;
};

// Forward + judge for a span of tasks, `parallel` at a time. Results land at
// the task's own index regardless of completion order.
std::vector<TaskResult> run_wave(const Engine& engine, const graph::Network& network,
                                 const std::vector<exec::TaskInstance>& tasks,
                                 const std::vector<size_t>& order, int parallel) {
  std::vector<TaskResult> results(order.size());
  auto run_one = [&](size_t slot) {
    const auto& task = tasks[order[slot]];
    try {
      auto trajectory = exec::run_forward(engine, network, task);
      results[slot].outcome = eval::evaluate_task(engine, task, trajectory.final_output);
      results[slot].trajectory = std::move(trajectory);
    } catch (const std::exception& e) {
      results[slot].outcome = failed_outcome_for(task, e.what());
    }
  };

  if (parallel <= 1) {
    for (size_t i = 0; i < order.size(); ++i) run_one(i);
    return results;
  }
  for (size_t base = 0; base < order.size(); base += static_cast<size_t>(parallel)) {
    size_t end = std::min(order.size(), base + static_cast<size_t>(parallel));
    std::vector<std::thread> workers;
    for (size_t i = base; i < end; ++i) workers.emplace_back(run_one, i);
    for (auto& worker : workers) worker.join();
  }
  return results;
}

int count_fallbacks(const exec::Trajectory& trajectory) {
  int count = 0;
  for (const auto& event : trajectory.events) {
    if (event.kind == exec::EventKind::RoutingFallback) ++count;
  }
  return count;
}

struct StepWriter {
  fs::path run_dir;  // empty means no persistence
  int next_step = 1;

  void global_report(int epoch, const std::string& task_id,
                     const opt::GlobalLossReport& report) {
    if (run_dir.empty()) return;
    ordered_json envelope;
    envelope["step"] = next_step;
    envelope["epoch"] = epoch;
    envelope["task_id"] = task_id;
    envelope["report"] = ordered_json::parse(opt::report_to_json(report));
    write_file(run_dir / ("step-" + std::to_string(next_step) + ".global.json"),
               envelope.dump(2) + "\n");
    ++next_step;
  }

  void accepted_block(int epoch, const std::string& task_id, int layer_index,
                      const graph::BlockVariant& block) {
    if (run_dir.empty()) return;
    ordered_json envelope;
    envelope["step"] = next_step;
    envelope["epoch"] = epoch;
    envelope["task_id"] = task_id;
    envelope["layer_index"] = layer_index;
    envelope["block"] = ordered_json::parse(graph::block_to_json(block));
    write_file(run_dir / ("step-" + std::to_string(next_step) + ".block.json"),
               envelope.dump(2) + "\n");
    ++next_step;
  }

  void trajectory(int epoch, const char* split, const exec::Trajectory& trajectory) {
    if (run_dir.empty()) return;
    write_file(run_dir / ("epoch-" + std::to_string(epoch)) / split /
                   (trajectory.task_id + ".trajectory.json"),
               exec::trajectory_to_json(trajectory));
  }
};

}  // namespace

std::string epoch_metrics_to_json(const EpochMetrics& metrics) {
  ordered_json out;
  out["epoch"] = metrics.epoch;
  out["train_metric"] = ordered_json::parse(fixed6(metrics.train_metric));
  out["validation_metric"] = ordered_json::parse(fixed6(metrics.validation_metric));
  out["pool_sizes"] = metrics.pool_sizes;
  out["accepted_updates"] = metrics.accepted_updates;
  out["rejected_updates"] = metrics.rejected_updates;
  out["routing_fallbacks"] = metrics.routing_fallbacks;
  out["usage"] = {{"input_tokens", metrics.usage.input_tokens},
                  {"output_tokens", metrics.usage.output_tokens},
                  {"cost_estimate",
                   ordered_json::parse(fixed6(metrics.usage.cumulative_cost_estimate))}};
  out["revision"] = metrics.revision;
  return out.dump() + "\n";
}

EpochMetrics epoch_metrics_from_json(const std::string& json_line) {
  ordered_json parsed = ordered_json::parse(json_line, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    throw Error(ErrorCode::ParseError, "metrics line is not a JSON object");
  }
  EpochMetrics metrics;
  metrics.epoch = parsed.value("epoch", 0);
  metrics.train_metric = parsed.value("train_metric", 0.0);
  metrics.validation_metric = parsed.value("validation_metric", 0.0);
  if (parsed.contains("pool_sizes")) {
    for (const auto& size : parsed.at("pool_sizes")) {
      metrics.pool_sizes.push_back(size.get<int>());
    }
  }
  metrics.accepted_updates = parsed.value("accepted_updates", 0);
  metrics.rejected_updates = parsed.value("rejected_updates", 0);
  metrics.routing_fallbacks = parsed.value("routing_fallbacks", 0);
  if (parsed.contains("usage")) {
    const auto& usage = parsed.at("usage");
    metrics.usage.input_tokens = usage.value("input_tokens", std::int64_t{0});
    metrics.usage.output_tokens = usage.value("output_tokens", std::int64_t{0});
    metrics.usage.cumulative_cost_estimate = usage.value("cost_estimate", 0.0);
  }
  metrics.revision = parsed.value("revision", std::uint64_t{0});
  return metrics;
}

double evaluate(const Engine& engine, const graph::Network& network,
                const std::vector<exec::TaskInstance>& tasks, int parallel_tasks,
                std::vector<eval::EvalOutcome>* outcomes_out,
                std::vector<exec::Trajectory>* trajectories_out) {
  if (tasks.empty()) throw Error(ErrorCode::InvalidArgument, "dataset is empty");
  std::vector<size_t> order(tasks.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto results = run_wave(engine, network, tasks, order, parallel_tasks);

  std::vector<eval::EvalOutcome> outcomes;
  outcomes.reserve(results.size());
  for (auto& result : results) {
    outcomes.push_back(result.outcome);
    if (trajectories_out && result.trajectory) {
      trajectories_out->push_back(std::move(*result.trajectory));
    }
  }
  double metric = eval::dataset_metric(outcomes);
  if (outcomes_out) *outcomes_out = std::move(outcomes);
  return metric;
}

namespace {

// One backward pass for one failed task: global gradient, then local updates
// for the flagged layers in reverse order.
void backward_pass(const Engine& engine, graph::Network& network,
                   const exec::TaskInstance& task, const exec::Trajectory& trajectory,
                   const eval::EvalOutcome& outcome, opt::VelocityStore& velocity,
                   const std::vector<exec::TaskInstance>& validation_tasks, int epoch,
                   StepWriter& steps, EpochMetrics& metrics, RunStats& stats) {
  const auto& config = engine.config;
  ++stats.backward_invocations;

  opt::GlobalLossReport report;
  try {
    report = opt::compute_global_gradient(engine, network, trajectory, outcome,
                                          task.ground_truth);
  } catch (const std::exception& e) {
    ++stats.skipped_tasks;
    stats.warnings.push_back("task " + task.task_id +
                             ": global gradient failed: " + e.what());
    return;
  }
  steps.global_report(epoch, task.task_id, report);

  auto updated = opt::global_gradient_update(network, report, trajectory);
  for (const auto& warning : updated.warnings) {
    stats.warnings.push_back("task " + task.task_id + ": " + warning);
  }
  network = std::move(updated.network);

  std::vector<int> flagged(updated.flagged_layers.begin(),
                           updated.flagged_layers.end());
  std::sort(flagged.rbegin(), flagged.rend());  // strictly decreasing layer order

  for (int layer_index : flagged) {
    graph::LayerSlot* layer = nullptr;
    for (auto& candidate : network.layers) {
      if (candidate.layer_index == layer_index) layer = &candidate;
    }
    if (!layer) continue;

    // The parent is the variant that actually ran for this task.
    const exec::LayerRecord* record = nullptr;
    for (const auto& candidate : trajectory.layer_records) {
      if (candidate.layer_index == layer_index) record = &candidate;
    }
    const graph::BlockVariant* parent =
        record ? layer->find_block(record->selected_block_id) : nullptr;
    if (!parent) {
      for (const auto& member : layer->pool) {
        if (!parent || member.block_id < parent->block_id) parent = &member;
      }
    }
    if (!parent) continue;

    auto propose = [&, layer_index](const std::vector<std::string>& reasons) {
      return opt::compute_local_gradient(engine, layer_index, *parent, trajectory,
                                         report, config.optimizer.beta,
                                         layer->max_block_id() + 1, task.ground_truth,
                                         reasons);
    };

    opt::LocalGradient gradient;
    try {
      gradient = propose({});
    } catch (const std::exception& e) {
      ++metrics.rejected_updates;
      stats.warnings.push_back("task " + task.task_id + ", layer " +
                               std::to_string(layer_index) +
                               ": local gradient failed: " + e.what());
      layer->pending_feedback.reset();
      continue;
    }

    if (config.run.toggles.momentum) {
      bool merged = velocity.get(layer_index, parent->block_id).has_value();
      auto inputs = opt::momentum_inputs_from(
          *parent, record, outcome.passed ? "passed" : outcome.raw_judge_text);
      gradient = opt::apply_momentum(engine, layer_index, parent->block_id, gradient,
                                     velocity, config.optimizer.alpha, inputs,
                                     steps.next_step, &stats.warnings);
      if (merged) ++stats.momentum_applications;
    }

    opt::PerformanceFn performance;
    if (config.run.toggles.performance_validation) {
      performance = [&](const graph::BlockVariant& candidate, std::string* why) {
        return opt::validate_performance(engine, network, layer_index, candidate,
                                         *parent, validation_tasks,
                                         config.optimizer.perf_validation_sample,
                                         config.run.seed, why);
      };
    }

    auto result = opt::local_gradient_update(*layer, *parent, gradient,
                                             config.optimizer, propose, performance);
    if (result.accepted) {
      ++metrics.accepted_updates;
      steps.accepted_block(epoch, task.task_id, layer_index, *result.new_block);
    } else {
      ++metrics.rejected_updates;
      for (const auto& reason : result.reasons) {
        stats.warnings.push_back("task " + task.task_id + ", layer " +
                                 std::to_string(layer_index) + ": " + reason);
      }
    }
    layer->pending_feedback.reset();  // consumed by this update attempt
  }
}

}  // namespace

TrainResult train(const Engine& engine, const graph::Network& network,
                  const std::vector<exec::TaskInstance>& train_tasks,
                  const std::vector<exec::TaskInstance>& validation_tasks,
                  const std::string& run_dir) {
  if (train_tasks.empty() || validation_tasks.empty()) {
    throw Error(ErrorCode::InvalidArgument, "train and validation sets must be non-empty");
  }

  const auto& config = engine.config;
  TrainResult result;
  result.network = network;
  StepWriter steps{run_dir.empty() ? fs::path() : fs::path(run_dir)};
  opt::VelocityStore velocity;

  for (int epoch = 0; epoch < config.run.epochs; ++epoch) {
    velocity.clear();  // adjustment direction does not outlive an epoch
    EpochMetrics metrics;
    metrics.epoch = epoch;

    std::vector<size_t> order(train_tasks.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(config.run.seed + static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<eval::EvalOutcome> train_outcomes;
    size_t wave = std::max<size_t>(1, static_cast<size_t>(config.run.parallel_tasks));
    for (size_t base = 0; base < order.size(); base += wave) {
      size_t end = std::min(order.size(), base + wave);
      std::vector<size_t> slice(order.begin() + base, order.begin() + end);
      // The wave runs against the network snapshot taken at its start.
      auto wave_results = run_wave(engine, result.network, train_tasks, slice,
                                   config.run.parallel_tasks);
      for (size_t i = 0; i < wave_results.size(); ++i) {
        auto& task_result = wave_results[i];
        const auto& task = train_tasks[slice[i]];
        train_outcomes.push_back(task_result.outcome);
        if (!task_result.trajectory) {
          ++result.stats.skipped_tasks;
          result.stats.warnings.push_back("task " + task.task_id + ": " +
                                          task_result.outcome.diagnostic);
          continue;
        }
        metrics.routing_fallbacks += count_fallbacks(*task_result.trajectory);
        steps.trajectory(epoch, "train", *task_result.trajectory);
        if (!task_result.outcome.passed && config.run.toggles.backward) {
          backward_pass(engine, result.network, task, *task_result.trajectory,
                        task_result.outcome, velocity, validation_tasks, epoch, steps,
                        metrics, result.stats);
        }
      }
    }

    metrics.train_metric = eval::dataset_metric(train_outcomes);

    std::vector<exec::Trajectory> validation_trajectories;
    metrics.validation_metric =
        evaluate(engine, result.network, validation_tasks, config.run.parallel_tasks,
                 nullptr, &validation_trajectories);
    for (const auto& trajectory : validation_trajectories) {
      metrics.routing_fallbacks += count_fallbacks(trajectory);
      steps.trajectory(epoch, "val", trajectory);
    }

    for (const auto& layer : result.network.layers) {
      metrics.pool_sizes.push_back(static_cast<int>(layer.pool.size()));
    }
    metrics.usage = engine.gateway->usage();
    metrics.revision = result.network.revision;
    result.history.push_back(metrics);

    if (!run_dir.empty()) {
      write_file(fs::path(run_dir) / ("epoch-" + std::to_string(epoch) +
                                      ".network.json"),
                 graph::network_to_json(result.network));
      append_file(fs::path(run_dir) / "history.jsonl",
                  epoch_metrics_to_json(metrics));
    }
  }

  return result;
}

}  // namespace ann::train
