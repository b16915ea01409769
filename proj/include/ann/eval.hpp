// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "ann/forward.hpp"
#include "ann/runtime.hpp"

namespace ann::eval {

struct RubricScore {
  double coherence = 0.0;
  double engagement = 0.0;
  double adherence = 0.0;
  double creativity = 0.0;
  std::string suggestions;
  double overall = 0.0;
};

/// Judged result for one task. Parsing failures never escape this type:
/// an unreadable judge reply becomes a failed outcome with the flag set.
struct EvalOutcome {
  enum class Kind { Verdict, Rubric };
  Kind kind = Kind::Verdict;
  llm::Verdict verdict;        // Kind::Verdict
  RubricScore rubric;          // Kind::Rubric
  bool passed = false;
  std::string raw_judge_text;
  bool judge_parse_failed = false;
  std::string diagnostic;
};

/// Parses the six labeled rubric fields ("Coherence:", "Engagement:",
/// "Adherence:", "Creativity:", "Suggestions for Improvement:",
/// "Overall Score:"), each accepting "Label: [n ...]" or "Label: n".
/// Throws Error(RubricUnparseable) naming every missing field.
RubricScore parse_rubric(const std::string& text);

/// Ground-truth verification: renders the judge prompt, maps the reply to a
/// verdict. Passing set is exactly {Correct, Approximated}.
EvalOutcome verify_with_ground_truth(const Engine& engine, const std::string& problem,
                                     const std::string& final_answer,
                                     const std::string& solution);

/// Open-ended rubric scoring; passed iff overall >= the configured threshold.
EvalOutcome score_open_ended(const Engine& engine, const std::string& task_prompt,
                             const std::string& output);

/// Dispatches on the task: ground truth present -> verification, absent ->
/// rubric scoring.
EvalOutcome evaluate_task(const Engine& engine, const exec::TaskInstance& task,
                          const std::string& final_output);

/// Dataset aggregate: fraction passed for verdict outcomes, mean overall for
/// rubric outcomes. Throws Error(MixedOutcomeKinds) when kinds are mixed and
/// Error(InvalidArgument) on an empty list.
double dataset_metric(const std::vector<EvalOutcome>& outcomes);

}  // namespace ann::eval
