/* SPDX-License-Identifier: Apache-2.0 */
#ifndef ANN_ANN_H
#define ANN_ANN_H

/*
 * C interface to the agentic-network engine.
 *
 * Conventions:
 *   - Every fallible call returns ann_status; ANN_OK is 0.
 *   - On failure, ann_last_error() returns a thread-local message describing
 *     what went wrong. The pointer is valid until the next failing call on
 *     the same thread.
 *   - Output strings (char** parameters) are allocated by the library and
 *     must be released with ann_string_free().
 *   - Handles are opaque; release them with their matching _free call.
 *     Passing NULL to a _free function is a no-op.
 *   - An engine is immutable after creation and may be shared across
 *     threads. Networks are plain values; do not mutate one concurrently
 *     with a call that reads it.
 */

#include <stdint.h>

#if defined(_WIN32)
#define ANN_API __declspec(dllexport)
#else
#define ANN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ann_status {
  ANN_OK = 0,
  ANN_ERR_INVALID_ARGUMENT = 1,
  ANN_ERR_CONFIG_INVALID = 2,
  ANN_ERR_IO = 3,
  ANN_ERR_PARSE = 4,
  ANN_ERR_PATH_EXISTS = 5,
  ANN_ERR_CYCLE_DETECTED = 6,
  ANN_ERR_MISSING_BINDING = 7,
  ANN_ERR_MISSING_TAG = 8,
  ANN_ERR_UNBALANCED_TAG = 9,
  ANN_ERR_UNRECOGNIZED_VERDICT = 10,
  ANN_ERR_NO_MATCHING_RULE = 11,
  ANN_ERR_TIMEOUT = 12,
  ANN_ERR_RATE_LIMITED = 13,
  ANN_ERR_MALFORMED_PROVIDER_REPLY = 14,
  ANN_ERR_UNRESOLVABLE_VARIABLE = 15,
  ANN_ERR_NODE_EXECUTION_FAILED = 16,
  ANN_ERR_JUDGE_UNPARSEABLE = 17,
  ANN_ERR_RUBRIC_UNPARSEABLE = 18,
  ANN_ERR_MIXED_OUTCOME_KINDS = 19,
  ANN_ERR_GRADIENT_UNPARSEABLE = 20,
  ANN_ERR_LAYERWISE_UNPARSEABLE = 21,
  ANN_ERR_EDIT_BUDGET_EXCEEDED = 22,
  ANN_ERR_UNKNOWN_LAYER_REFERENCE = 23,
  ANN_ERR_INTERNAL = 24
} ann_status;

/* Stable name for a status value, e.g. "EditBudgetExceeded". */
ANN_API const char* ann_status_name(ann_status status);

/* Thread-local message from the most recent failing call; never NULL. */
ANN_API const char* ann_last_error(void);

ANN_API void ann_string_free(char* text);

typedef struct ann_engine ann_engine;
typedef struct ann_network ann_network;

/* ---- engine ---------------------------------------------------------- */

/* config_json uses the same schema as a project's config.json. */
ANN_API ann_status ann_engine_create(const char* config_json, ann_engine** out);
ANN_API ann_status ann_engine_create_from_file(const char* config_path,
                                               ann_engine** out);
ANN_API void ann_engine_free(ann_engine* engine);

/* Cumulative token/cost usage as JSON:
 * {"input_tokens": n, "output_tokens": n, "cost_estimate": x}. */
ANN_API ann_status ann_engine_usage(const ann_engine* engine, char** out_json);

/* ---- networks -------------------------------------------------------- */

ANN_API ann_status ann_network_parse(const char* network_json, ann_network** out);
ANN_API ann_status ann_network_load(const char* path, ann_network** out);
ANN_API ann_status ann_network_to_json(const ann_network* network, char** out_json);
ANN_API void ann_network_free(ann_network* network);

/* Validates every block against its layer pool. Always returns a report
 * (JSON array, one entry per block with any failures listed); the status is
 * ANN_OK even when blocks fail, and an error only for bad arguments. */
ANN_API ann_status ann_network_validate(const ann_network* network,
                                        char** out_report_json);

/* ---- running --------------------------------------------------------- */

/* task_json: {"task_id", "task_prompt", "task_data"?, "ground_truth"?}.
 * Returns the full trajectory as JSON. */
ANN_API ann_status ann_run_forward(const ann_engine* engine,
                                   const ann_network* network,
                                   const char* task_json,
                                   char** out_trajectory_json);

/* Forward + judging over a dataset file (JSON array of tasks). Writes the
 * fraction/mean metric and, when out_outcomes_json is non-NULL, a JSON array
 * of {task_id, passed, detail}. */
ANN_API ann_status ann_evaluate(const ann_engine* engine,
                                const ann_network* network,
                                const char* dataset_path, double* out_metric,
                                char** out_outcomes_json);

/* Full training loop driven by the engine's run configuration. Dataset
 * paths come from the config; run_dir may be NULL or empty to skip artifact
 * persistence. Writes the evolved network handle and a JSON summary
 * {"history": [...], "stats": {...}}. */
ANN_API ann_status ann_train(const ann_engine* engine, const ann_network* network,
                             const char* train_dataset_path,
                             const char* validation_dataset_path,
                             const char* run_dir, ann_network** out_network,
                             char** out_summary_json);

/* ---- project plumbing ------------------------------------------------ */

/* Scaffolds a starter project; out_files_json lists the files written. */
ANN_API ann_status ann_project_init(const char* path, char** out_files_json);

/* Renders the run-directory summary (epoch table plus block lineage). */
ANN_API ann_status ann_inspect_run(const char* run_dir, char** out_text);

#ifdef __cplusplus
}
#endif

#endif /* ANN_ANN_H */
